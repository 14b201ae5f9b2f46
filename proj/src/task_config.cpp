// SPDX-License-Identifier: Apache-2.0
#include "buildarena/task_config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "buildarena/catalog.hpp"

namespace buildarena::tasks {

namespace {

using json = nlohmann::json;

const json& field(const json& doc, const std::string& path)
{
    const json* node = &doc;
    std::size_t begin = 0;
    while (begin <= path.size()) {
        const auto dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
        if (!node->is_object() || !node->contains(key) || node->at(key).is_null())
            throw ConfigError(path, "is missing");
        node = &node->at(key);
        if (dot == std::string::npos)
            break;
        begin = dot + 1;
    }
    return *node;
}

template <typename T>
T typed(const json& doc, const std::string& path)
{
    const json& v = field(doc, path);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path, fmt::format("has the wrong type ({})", v.type_name()));
    }
}

double number_or(const json& protocol, const char* key, double fallback)
{
    if (!protocol.contains(key))
        return fallback;
    if (!protocol.at(key).is_number())
        throw ConfigError(fmt::format("protocol.{}", key), "must be a number");
    return protocol.at(key).get<double>();
}

Vec3 vec_or(const json& protocol, const char* key, Vec3 fallback)
{
    if (!protocol.contains(key))
        return fallback;
    const json& v = protocol.at(key);
    if (!v.is_array() || v.size() < 2 || v.size() > 3)
        throw ConfigError(fmt::format("protocol.{}", key), "must be a list of two or three numbers");
    Vec3 out = Vec3::Zero();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            throw ConfigError(fmt::format("protocol.{}", key), "must hold numbers");
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::string field_name, const std::string& detail)
    : std::runtime_error(fmt::format("task config field '{}' {}", field_name, detail)), field(std::move(field_name))
{
}

std::string_view to_string(TaskKind kind)
{
    switch (kind) {
    case TaskKind::transport: return "transport";
    case TaskKind::support: return "support";
    case TaskKind::lift: return "lift";
    }
    return "?";
}

std::string TaskConfig::name() const { return fmt::format("{}_lv{}", task_id, level); }

TaskConfig parse_task_config(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", fmt::format("is not valid JSON: {}", e.what()));
    }
    if (typed<std::string>(doc, "format") != "buildarena.task")
        throw ConfigError("format", "must be \"buildarena.task\"");
    if (typed<int>(doc, "version") != 1)
        throw ConfigError("version", "is not a supported version");

    TaskConfig task;
    task.task_id = typed<std::string>(doc, "task_id");
    if (task.task_id == "transport")
        task.kind = TaskKind::transport;
    else if (task.task_id == "support")
        task.kind = TaskKind::support;
    else if (task.task_id == "lift")
        task.kind = TaskKind::lift;
    else
        throw ConfigError("task_id", fmt::format("names an unknown task '{}'", task.task_id));
    task.level = typed<int>(doc, "level");
    if (task.level < 1 || task.level > 3)
        throw ConfigError("level", "must be 1, 2 or 3");
    task.prompt = typed<std::string>(doc, "prompt");
    task.max_substructures = doc.contains("max_substructures") ? typed<int>(doc, "max_substructures") : 1;
    task.requires_controller = doc.contains("requires_controller") ? typed<bool>(doc, "requires_controller") : false;
    task.protocol = field(doc, "protocol");
    if (!task.protocol.is_object())
        throw ConfigError("protocol", "must be an object");

    task.success.indicator = typed<std::string>(doc, "success.indicator");
    const auto comparison = typed<std::string>(doc, "success.comparison");
    if (comparison == "gt")
        task.success.comparison = evaluate::Comparison::gt;
    else if (comparison == "ge")
        task.success.comparison = evaluate::Comparison::ge;
    else
        throw ConfigError("success.comparison", "must be \"gt\" or \"ge\"");
    task.success.threshold = typed<double>(doc, "success.threshold");
    task.success.paper_value = doc.at("success").value("paper_value", false);

    static const std::map<TaskKind, std::vector<std::string>> indicators{
        {TaskKind::transport, {"max_displacement"}},
        {TaskKind::support, {"load_capacity"}},
        {TaskKind::lift, {"twr", "max_height"}},
    };
    const auto& allowed = indicators.at(task.kind);
    if (std::find(allowed.begin(), allowed.end(), task.success.indicator) == allowed.end())
        throw ConfigError("success.indicator", fmt::format("'{}' is not reported for {}", task.success.indicator, task.task_id));
    return task;
}

TaskConfig load_task_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("<file>", fmt::format("cannot be read from {}", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_task_config(buffer.str());
}

std::vector<std::string> builtin_task_names()
{
    std::vector<std::string> out;
    for (const char* task : {"transport", "support", "lift"}) {
        for (int level = 1; level <= 3; ++level)
            out.push_back(fmt::format("{}_lv{}", task, level));
    }
    return out;
}

TaskConfig load_builtin_task(std::string_view name)
{
    const auto names = builtin_task_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("<name>", fmt::format("'{}' is not a shipped task", name));
    return load_task_file(catalog::asset_dir() / "tasks" / (std::string(name) + ".json"));
}

TaskOutcome evaluate_task(const TaskConfig& task, const scene::Scene& scene)
{
    TaskOutcome out;
    out.parts = scene.part_count();
    if (!scene.started()) {
        out.detail = "no machine was built";
        return out;
    }
    const json& p = task.protocol;
    switch (task.kind) {
    case TaskKind::transport: {
        evaluate::TransportOptions options;
        options.duration = number_or(p, "duration", options.duration);
        options.dt = number_or(p, "dt", options.dt);
        const Vec3 start = vec_or(p, "start", Vec3::Zero());
        options.start = Vec3(start.x(), start.y(), 0.0);
        options.subject = p.value("subject", std::string("machine")) == "cargo" ? evaluate::TransportSubject::cargo
                                                                                : evaluate::TransportSubject::machine;
        const auto r = evaluate::simulate_transport(scene, scene.control(), options);
        out.indicator = r.max_displacement;
        out.detail = r.status == evaluate::TransportStatus::ok
                         ? fmt::format("{} grounded wheel(s)", r.ground_wheels)
                         : std::string(evaluate::to_string(r.status));
        break;
    }
    case TaskKind::support: {
        evaluate::SupportOptions options;
        options.gap_width = number_or(p, "gap_width", options.gap_width);
        options.terrain_height = number_or(p, "terrain_height", options.terrain_height);
        const Vec3 cargo = vec_or(p, "cargo_size", Vec3(options.cargo_width, options.cargo_depth, 0.0));
        options.cargo_width = cargo.x();
        options.cargo_depth = cargo.y();
        options.min_bearing = number_or(p, "min_bearing", options.min_bearing);
        options.attachment_strength = number_or(p, "attachment_strength", options.attachment_strength);
        options.brace_strength = number_or(p, "brace_strength", options.brace_strength);
        options.block_strength = number_or(p, "block_strength", options.block_strength);
        const auto r = evaluate::evaluate_support(scene, options);
        out.indicator = r.load_capacity;
        out.detail = r.spans ? fmt::format("spans with capacity {}", r.load_capacity) : r.reason;
        break;
    }
    case TaskKind::lift: {
        evaluate::LiftOptions options;
        options.duration = number_or(p, "duration", options.duration);
        options.dt = number_or(p, "dt", options.dt);
        options.gravity = number_or(p, "gravity", options.gravity);
        const auto r = evaluate::simulate_lift(scene, scene.control(), options);
        out.indicator = task.success.indicator == "twr" ? r.twr : r.max_height;
        out.detail = fmt::format("twr {:.4f}, max height {:.3f}", r.twr, r.max_height);
        break;
    }
    }
    out.success = evaluate::meets_threshold(out.indicator, task.success.comparison, task.success.threshold);
    return out;
}

}  // namespace buildarena::tasks
