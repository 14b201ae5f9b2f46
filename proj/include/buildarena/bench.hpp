// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "buildarena/evaluate.hpp"
#include "buildarena/task_config.hpp"
#include "buildarena/workflow.hpp"

namespace buildarena::bench {

/// Fresh backend for sample `index`; called once per sample.
using BackendFactory = std::function<std::unique_ptr<workflow::AgentBackend>(int index)>;

/// Scripted backends from either one script or {"samples": [script, ...]} (cycled by index).
BackendFactory scripted_factory(const nlohmann::json& document);

struct BenchOptions {
    int samples = 64;
    /// Worker threads; samples are independent.
    int jobs = 1;
    workflow::WorkflowOptions workflow;
};

struct SampleOutcome {
    evaluate::MetricsRecord record;
    std::string state_hash;
    std::string transcript_hash;
};

struct BenchReport {
    std::vector<SampleOutcome> samples;
    evaluate::Summary summary;

    std::vector<evaluate::MetricsRecord> records() const;
};

/// Scores one finished (or failed) run.
evaluate::MetricsRecord score_run(const workflow::WorkflowRun& run, int sample);

BenchReport run_bench(const tasks::TaskConfig& task, std::shared_ptr<const catalog::Catalog> catalog,
                      const BackendFactory& factory, const BenchOptions& options = {});

/// Writes records.csv, summary.csv and summary.json into `directory` (created if needed).
void write_reports(const BenchReport& report, const std::filesystem::path& directory);

}  // namespace buildarena::bench
