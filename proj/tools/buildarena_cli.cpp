// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: build, replay, evaluate, serve, describe, export and bench.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "buildarena/bench.hpp"
#include "buildarena/describe.hpp"
#include "buildarena/machine_file.hpp"
#include "buildarena/native_format.hpp"
#include "buildarena/task_config.hpp"
#include "buildarena/tool_server.hpp"

using namespace buildarena;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path)
{
    if (path == "-") {
        std::stringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error(fmt::format("cannot read {}", path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(fmt::format("cannot write {}", path));
    out << text;
}

std::shared_ptr<const catalog::Catalog> load_catalog(const std::string& override_path)
{
    if (override_path.empty())
        return catalog::load_default_catalog();
    return std::make_shared<const catalog::Catalog>(catalog::load_catalog_file(override_path));
}

/// Action list from a JSON array or from JSON lines. Entries are {category?, name, arguments}.
std::vector<Action> read_actions(const std::string& text)
{
    std::vector<json> items;
    const json whole = json::parse(text, nullptr, false);
    if (!whole.is_discarded() && whole.is_array()) {
        items.assign(whole.begin(), whole.end());
    } else {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            items.push_back(json::parse(line));
        }
    }
    std::vector<Action> out;
    for (const auto& item : items) {
        if (item.contains("action"))
            out.push_back(action_from_json(item.at("action")));
        else {
            const std::string name = item.at("name").get<std::string>();
            auto category = item.contains("category") ? category_from_string(item["category"].get<std::string>())
                                                      : actions::registered_category(name);
            out.push_back(Action{category.value_or(ActionCategory::query), name,
                                 item.value("arguments", json::object()), item.value("note", std::string())});
        }
    }
    return out;
}

tasks::TaskConfig pick_task(const std::string& name, const std::string& file)
{
    if (!file.empty())
        return tasks::load_task_file(file);
    return tasks::load_builtin_task(name);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Modular construction workbench: build, evaluate and benchmark block machines"};
    app.require_subcommand(1);
    std::string catalog_path;
    app.add_option("--catalog", catalog_path, "Catalog JSON (default: BUILDARENA_CATALOG or the shipped catalog)");

    // build
    auto* build = app.add_subcommand("build", "Apply an action script, or replay a document's log");
    std::string build_script, build_out, build_replay;
    bool build_quiet = false;
    build->add_option("script", build_script, "Actions as a JSON array or JSON lines ('-' for stdin)");
    build->add_option("--replay", build_replay, "Native document whose trajectory log is replayed");
    build->add_option("-o,--out", build_out, "Write the resulting native document here");
    build->add_flag("-q,--quiet", build_quiet, "Only print the final state hash");

    // replay
    auto* replay = app.add_subcommand("replay", "Replay a document's trajectory log and compare state hashes");
    std::string replay_doc;
    replay->add_option("document", replay_doc, "Native scene document")->required();

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a scene document against a task");
    std::string eval_doc, eval_task = "lift_lv1", eval_task_file;
    evaluate_cmd->add_option("document", eval_doc, "Native scene document")->required();
    evaluate_cmd->add_option("-t,--task", eval_task, "Shipped task name, e.g. transport_lv1");
    evaluate_cmd->add_option("--task-file", eval_task_file, "Task config file instead of a shipped task");

    // serve
    auto* serve = app.add_subcommand("serve", "Line-delimited JSON tool server on stdin/stdout");
    std::string serve_transcript;
    serve->add_option("--transcript", serve_transcript, "Append request/response pairs to this file");

    // describe
    auto* describe_cmd = app.add_subcommand("describe", "Machine summary, block detail or block-type description");
    std::string desc_doc, desc_type;
    int desc_block = -1;
    describe_cmd->add_option("document", desc_doc, "Native scene document");
    describe_cmd->add_option("--block", desc_block, "Describe one block of the document");
    describe_cmd->add_option("--type", desc_type, "Describe a catalog block type");

    // export
    auto* export_cmd = app.add_subcommand("export", "Convert a scene document");
    std::string export_doc, export_format = "machine", export_out, export_name = "machine";
    export_cmd->add_option("document", export_doc, "Native scene document")->required();
    export_cmd->add_option("-f,--format", export_format, "machine or native")
        ->check(CLI::IsMember({"machine", "native"}));
    export_cmd->add_option("-o,--out", export_out, "Output file (default stdout)");
    export_cmd->add_option("--name", export_name, "Machine name in the markup");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Run n scripted workflow samples and write reports");
    std::string bench_task = "lift_lv1", bench_task_file, bench_script, bench_out = "bench_report";
    int bench_n = 64, bench_jobs = 1;
    bench_cmd->add_option("-t,--task", bench_task, "Shipped task name");
    bench_cmd->add_option("--task-file", bench_task_file, "Task config file instead of a shipped task");
    bench_cmd->add_option("-s,--script", bench_script, "Scripted backend JSON")->required();
    bench_cmd->add_option("-n,--samples", bench_n, "Number of samples")->check(CLI::PositiveNumber);
    bench_cmd->add_option("-j,--jobs", bench_jobs, "Worker threads")->check(CLI::PositiveNumber);
    bench_cmd->add_option("-o,--out", bench_out, "Report directory");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto catalog = load_catalog(catalog_path);

        if (*build) {
            if (build_replay.empty() == build_script.empty())
                throw std::runtime_error("give either an action script or --replay <document>");
            actions::Workbench bench(catalog);
            if (!build_replay.empty()) {
                const auto original = io::import_native(read_file(build_replay), catalog);
                bench = actions::replay(original.log(), catalog);
            } else {
                for (const auto& action : read_actions(read_file(build_script))) {
                    const auto result = bench.apply(action);
                    if (!build_quiet)
                        std::cout << fmt::format("[{}] {}: {}\n", result.ok ? "ok" : "error", action.name,
                                                 result.description);
                }
            }
            if (!build_out.empty())
                write_output(build_out, io::export_native(bench));
            std::cout << "state hash " << bench.scene().state_hash() << "\n";
            return 0;
        }
        if (*replay) {
            const auto original = io::import_native(read_file(replay_doc), catalog);
            const auto again = actions::replay(original.log(), catalog);
            const std::string a = original.scene().state_hash();
            const std::string b = again.scene().state_hash();
            std::cout << fmt::format("document {}\nreplayed {}\n{}\n", a, b, a == b ? "match" : "MISMATCH");
            return a == b ? 0 : 1;
        }
        if (*evaluate_cmd) {
            const auto task = pick_task(eval_task, eval_task_file);
            const auto bench = io::import_native(read_file(eval_doc), catalog);
            const auto outcome = tasks::evaluate_task(task, bench.scene());
            nlohmann::ordered_json out{{"task", task.name()},
                                       {"indicator_name", task.success.indicator},
                                       {"indicator", outcome.indicator},
                                       {"success", outcome.success},
                                       {"parts", outcome.parts},
                                       {"detail", outcome.detail}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (*serve) {
            io::ToolServer server(catalog);
            std::ofstream transcript;
            if (!serve_transcript.empty())
                transcript.open(serve_transcript, std::ios::app);
            server.serve(std::cin, std::cout, transcript.is_open() ? &transcript : nullptr);
            return 0;
        }
        if (*describe_cmd) {
            if (!desc_type.empty()) {
                std::cout << catalog::describe_block_type(*catalog, desc_type) << "\n";
                return 0;
            }
            if (desc_doc.empty()) {
                for (const auto& id : catalog->type_ids())
                    std::cout << catalog::describe_block_type(*catalog, id) << "\n\n";
                return 0;
            }
            const auto bench = io::import_native(read_file(desc_doc), catalog);
            std::cout << (desc_block >= 0 ? describe::block_detail(bench.scene(), desc_block)
                                          : describe::machine_summary(bench.scene()))
                      << "\n";
            return 0;
        }
        if (*export_cmd) {
            const auto bench = io::import_native(read_file(export_doc), catalog);
            write_output(export_out, export_format == "machine" ? io::export_machine_file(bench.scene(), export_name)
                                                                : io::export_native(bench));
            return 0;
        }
        if (*bench_cmd) {
            const auto task = pick_task(bench_task, bench_task_file);
            bench::BenchOptions options;
            options.samples = bench_n;
            options.jobs = bench_jobs;
            const auto factory = bench::scripted_factory(json::parse(read_file(bench_script)));
            const auto report = bench::run_bench(task, catalog, factory, options);
            bench::write_reports(report, bench_out);
            std::cout << evaluate::summary_csv(report.summary);
            return 0;
        }
    } catch (const tasks::ConfigError& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    } catch (const io::CatalogMismatch& e) {
        std::cerr << "CatalogMismatch: " << e.what() << "\n";
        return 2;
    } catch (const io::UnfinalizedScene& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
