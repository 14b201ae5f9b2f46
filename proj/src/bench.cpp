// SPDX-License-Identifier: Apache-2.0
#include "buildarena/bench.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace buildarena::bench {

BackendFactory scripted_factory(const nlohmann::json& document)
{
    std::vector<nlohmann::json> scripts;
    if (document.is_object() && document.contains("samples")) {
        for (const auto& s : document.at("samples"))
            scripts.push_back(s);
    } else {
        scripts.push_back(document);
    }
    if (scripts.empty())
        throw std::invalid_argument("a bench script needs at least one sample");
    // Parse once up front so a broken script fails before any run starts.
    for (const auto& s : scripts)
        workflow::ScriptedBackend::from_json(s);
    return [scripts = std::move(scripts)](int index) -> std::unique_ptr<workflow::AgentBackend> {
        const auto& script = scripts[static_cast<std::size_t>(index) % scripts.size()];
        return std::make_unique<workflow::ScriptedBackend>(workflow::ScriptedBackend::from_json(script));
    };
}

std::vector<evaluate::MetricsRecord> BenchReport::records() const
{
    std::vector<evaluate::MetricsRecord> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(s.record);
    return out;
}

evaluate::MetricsRecord score_run(const workflow::WorkflowRun& run, int sample)
{
    evaluate::MetricsRecord r;
    r.task_id = run.task.task_id;
    r.level = run.task.level;
    r.sample = sample;
    r.cost = workflow::account_costs(run);
    r.parts = run.scene().part_count();
    if (run.phase != workflow::RunPhase::done) {
        r.failure_reason = run.failure_reason ? std::string(workflow::to_string(*run.failure_reason)) : "format";
        return r;
    }
    const auto outcome = tasks::evaluate_task(run.task, run.scene());
    r.indicator = outcome.indicator;
    r.success = outcome.success;
    return r;
}

BenchReport run_bench(const tasks::TaskConfig& task, std::shared_ptr<const catalog::Catalog> catalog,
                      const BackendFactory& factory, const BenchOptions& options)
{
    if (options.samples <= 0)
        throw std::invalid_argument("bench needs at least one sample");
    BenchReport report;
    report.samples.resize(static_cast<std::size_t>(options.samples));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (int i = next++; i < options.samples; i = next++) {
            try {
                auto backend = factory(i);
                const auto run = workflow::run_workflow(task, catalog, *backend, options.workflow);
                auto& slot = report.samples[static_cast<std::size_t>(i)];
                slot.record = score_run(run, i);
                slot.state_hash = run.scene().state_hash();
                slot.transcript_hash = workflow::transcript_hash(run.transcript);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min(options.jobs, options.samples));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    const auto records = report.records();
    report.summary = evaluate::aggregate(records);
    return report;
}

void write_reports(const BenchReport& report, const std::filesystem::path& directory)
{
    std::filesystem::create_directories(directory);
    const auto records = report.records();
    const auto write = [&](const char* name, const std::string& text) {
        std::ofstream out(directory / name, std::ios::binary);
        if (!out)
            throw std::runtime_error(fmt::format("cannot write {}", (directory / name).string()));
        out << text;
    };
    write("records.csv", evaluate::records_csv(records));
    write("summary.csv", evaluate::summary_csv(report.summary));
    write("summary.json", evaluate::summary_json(report.summary, records));
}

}  // namespace buildarena::bench
