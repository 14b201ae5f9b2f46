// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "buildarena/evaluate.hpp"
#include "buildarena/scene.hpp"

namespace buildarena::tasks {

/// A task document is missing a field or carries a value of the wrong shape.
struct ConfigError : std::runtime_error {
    ConfigError(std::string field, const std::string& detail);
    std::string field;
};

enum class TaskKind { transport, support, lift };
std::string_view to_string(TaskKind kind);

struct SuccessRule {
    std::string indicator;
    evaluate::Comparison comparison = evaluate::Comparison::gt;
    double threshold = 0.0;
    /// True when the threshold is the published one rather than a local choice.
    bool paper_value = false;
};

struct TaskConfig {
    std::string task_id;
    TaskKind kind = TaskKind::transport;
    int level = 1;
    std::string prompt;
    int max_substructures = 1;
    bool requires_controller = false;
    nlohmann::json protocol = nlohmann::json::object();
    SuccessRule success;

    /// "lift_lv2" style identifier.
    std::string name() const;
};

TaskConfig parse_task_config(std::string_view document);
TaskConfig load_task_file(const std::filesystem::path& path);
/// One of the nine shipped configs, looked up by name ("support_lv3").
TaskConfig load_builtin_task(std::string_view name);
std::vector<std::string> builtin_task_names();

struct TaskOutcome {
    double indicator = 0.0;
    bool success = false;
    int parts = 0;
    std::string detail;
};

/// Runs the task's surrogate evaluator on a finished scene and applies the threshold.
TaskOutcome evaluate_task(const TaskConfig& task, const scene::Scene& scene);

}  // namespace buildarena::tasks
