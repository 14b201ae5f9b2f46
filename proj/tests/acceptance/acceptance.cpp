// SPDX-License-Identifier: Apache-2.0
//
// Runs the twelve acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "buildarena/bench.hpp"
#include "buildarena/control.hpp"
#include "buildarena/evaluate.hpp"
#include "buildarena/format.hpp"
#include "buildarena/geometry.hpp"
#include "buildarena/machine_file.hpp"
#include "buildarena/native_format.hpp"
#include "buildarena/tool_server.hpp"
#include "buildarena/workflow.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace buildarena;
using namespace buildarena::testing;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool condition, const std::string& what)
    {
        if (!condition) {
            pass = false;
            if (!detail.empty())
                detail += "; ";
            detail += what;
        }
    }
};

bool near(const Vec3& a, const Vec3& b, double tol) { return (a - b).cwiseAbs().maxCoeff() <= tol; }

// 1 -------------------------------------------------------------------------
Outcome catalog_fidelity()
{
    Outcome o;
    const auto cat = catalog::load_default_catalog();
    const auto& wheel = cat->block_spec("PoweredWheel");
    o.check(wheel.shape == Vec3(2, 2, 0.5) && wheel.mass == 1.0 && wheel.physical.wheel_rpm == 100.0, "wheel");
    const auto& cube = cat->block_spec("SmallWoodenBlock");
    o.check(cube.shape == Vec3(1, 1, 1) && cube.mass == 0.3, "small block");
    const auto& torch = cat->block_spec("Torch");
    o.check(torch.mass == 1.0 && torch.physical.heat_radius == 0.3, "torch");
    const auto& cannon = cat->block_spec("WaterCannon");
    o.check(cannon.mass == 1.5 && cannon.physical.recoil_force == 1.6 && cannon.physical.steam_multiplier == 8.6, "cannon");
    o.check(cat->block_spec("Brace").mass == 0.5, "brace");
    o.check(cat->block_spec("Winch").mass == 0.4, "winch");
    const auto& start = cat->block_spec("StartingBlock");
    o.check(start.shape == Vec3(1, 1, 1) && start.mass == 0.25, "starting block");
    return o;
}

// 2 -------------------------------------------------------------------------
Outcome worked_examples()
{
    Outcome o;
    actions::Workbench torch_bench(shared_catalog());
    must(torch_bench, "start");
    const int torch = must(torch_bench, "attach_block_to",
                           {{"base_block", 0}, {"face", "east"}, {"new_block", "Torch"}, {"pointing", "up"}})
                          .state_delta.created_blocks.at(0);
    const auto centers = evaluate::heat_centers(torch_bench.scene(), torch);
    o.check(centers.size() == 1 && near(centers[0], Vec3(1, 0, 1), 1e-9), "torch heat centre");
    o.check(torch_bench.scene().spec_of(torch).physical.heat_radius == 0.3, "torch heat radius");

    actions::Workbench cannon_bench(shared_catalog());
    must(cannon_bench, "start");
    const int cannon = must(cannon_bench, "attach_block_to",
                            {{"base_block", 0}, {"face", "east"}, {"new_block", "WaterCannon"}, {"pointing", "down"}})
                           .state_delta.created_blocks.at(0);
    const auto info = evaluate::cannon_info(cannon_bench.scene(), cannon, {});
    o.check(near(cannon_bench.scene().block(cannon).pose.position, Vec3(1, 0, 0), 1e-9), "cannon centre");
    o.check(near(info.inlet, Vec3(1, 0, 0.75), 1e-9), "cannon inlet");
    o.check(near(info.outlet, Vec3(1, 0, -1), 1e-9), "cannon outlet");
    return o;
}

// 3 -------------------------------------------------------------------------
Outcome twr_analytic()
{
    Outcome o;
    const auto cat = shared_catalog();
    // Oracle: exact rationals built from the catalog's decimal representation.
    const auto recoil = Rational::from_decimal(num(*cat->block_spec("WaterCannon").physical.recoil_force));
    const auto steam = Rational::from_decimal(num(*cat->block_spec("WaterCannon").physical.steam_multiplier));
    const auto mass = Rational::from_decimal(num(cat->block_spec("StartingBlock").mass)) +
                      Rational::from_decimal(num(cat->block_spec("WaterCannon").mass)) +
                      Rational::from_decimal(num(cat->block_spec("Torch").mass));
    const Rational expected = (recoil * steam) / mass;
    o.check(expected == Rational(1376, 275), fmt::format("oracle gives {}/{}", expected.num, expected.den));

    const auto heated = evaluate::thrust_and_twr(minimal_engine(true).scene());
    o.check(Rational::from_decimal(num(heated.net_thrust.z())) == Rational(1376, 100), "thrust is not 13.76");
    o.check(Rational::from_decimal(num(heated.total_mass)) == Rational(275, 100), "mass is not 2.75");
    o.check(heated.twr == 1376.0 / 275.0, fmt::format("twr {} is not the rounded 1376/275", num(heated.twr)));
    o.check(evaluate::meets_threshold(heated.twr, evaluate::Comparison::gt, 1.0), "heated engine fails TWR > 1");

    const auto cold = evaluate::thrust_and_twr(minimal_engine(false).scene());
    o.check(cold.twr == 1.6 / 2.75, fmt::format("unheated twr {}", num(cold.twr)));
    o.check(!evaluate::meets_threshold(cold.twr, evaluate::Comparison::gt, 1.0), "unheated engine passes TWR > 1");
    return o;
}

// 4 -------------------------------------------------------------------------
Outcome geometry_oracle()
{
    Outcome o;
    std::mt19937_64 rng(20240601);
    const int pairs = 1000;
    const int samples = 100000;
    const double band = 0.05;
    int decided = 0, agree = 0, overlapping = 0;
    for (int i = 0; i < pairs; ++i) {
        const auto [a, b] = random_obb_pair(rng);
        const double margin = sat_signed_separation(a, b);
        if (std::abs(margin) < band)
            continue;
        ++decided;
        const bool sat = geometry::obb_overlap(a, b, 0.0);
        const bool mc = monte_carlo_overlap(a, b, samples, rng);
        overlapping += mc;
        agree += sat == mc;
    }
    const double rate = decided ? static_cast<double>(agree) / decided : 0.0;
    o.detail = fmt::format("{}/{} decided pairs agree ({} overlapping)", agree, decided, overlapping);
    o.check(decided >= 500, "too few pairs outside the ambiguity band");
    o.check(overlapping > 50 && overlapping < decided - 50, "pair mix is lopsided");
    o.check(rate >= 0.999, "agreement below 99.9%");
    return o;
}

// 5 -------------------------------------------------------------------------
Outcome error_taxonomy()
{
    Outcome o;
    const auto expect = [&](actions::Workbench& bench, ErrorCode code, const std::string& name, const json& args) {
        const std::string before = bench.scene().state_hash();
        const auto r = act(bench, name, args);
        o.check(!r.ok && r.error == code, fmt::format("{} not raised ({})", to_string(code), r.description));
        o.check(bench.scene().state_hash() == before, fmt::format("{} changed the state", to_string(code)));
    };

    auto bench = four_wheel_car();
    must(bench, "attach_block_to", {{"base_block", 0}, {"face", "top"}, {"new_block", "SmallWoodenBlock"}, {"note", "mast"}});
    // A wheel on the spine's east face would cut through the front wheel's rim.
    expect(bench, ErrorCode::OverlapConflict, "attach_block_to",
           {{"base_block", 1}, {"face", "east"}, {"new_block", "PoweredWheel"}});
    expect(bench, ErrorCode::FaceOccupied, "attach_block_to",
           {{"base_block", 0}, {"face", "top"}, {"new_block", "SmallWoodenBlock"}});
    expect(bench, ErrorCode::InvalidFace, "attach_block_to",
           {{"base_block", 0}, {"face", "sideways"}, {"new_block", "SmallWoodenBlock"}});
    must(bench, "connect_blocks", {{"block_a", 0}, {"face_a", "east"}, {"block_b", 1}, {"face_b", "east"}});
    expect(bench, ErrorCode::ExcessConnection, "connect_blocks",
           {{"block_a", 0}, {"face_a", "east"}, {"block_b", 3}, {"face_b", "east"}});
    expect(bench, ErrorCode::StartingBlockProtected, "remove_block", {{"block", 0}});
    return o;
}

// 6 -------------------------------------------------------------------------
Outcome replay_determinism()
{
    Outcome o;
    int matched = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto bench = random_trajectory(seed, 100);
        const std::string doc = io::export_native(bench);
        const auto imported = io::import_native(doc, shared_catalog());
        const auto replayed = actions::replay(imported.log(), shared_catalog());
        const bool ok = replayed.scene().state_hash() == bench.scene().state_hash() &&
                        imported.scene().state_hash() == bench.scene().state_hash() &&
                        io::export_native(replayed) == doc;
        matched += ok;
        if (!ok)
            o.check(false, fmt::format("seed {} diverged", seed));
    }
    o.detail = fmt::format("{}/100 seeds reproduce", matched) + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

// 7 -------------------------------------------------------------------------
Outcome control_semantics()
{
    Outcome o;
    auto bench = four_wheel_car();
    must(bench, "bind_key", {{"key", "Alpha1"}, {"action", "spin_forward"}, {"block", "front east"}});
    const auto r = must(bench, "add_control_sequence", {{"time", 1.0}, {"key", "Alpha1"}, {"hold_for", 1.0}});
    o.check(!r.warning, "in-window entry flagged");
    const auto& controls = bench.scene().control();
    const auto wheel = bench.scene().find_by_note("front east").at(0);
    const std::set<control::ActiveAction> on{{wheel, "spin_forward"}};
    o.check(controls.active_actions_at(0.5).empty(), "active at 0.5");
    o.check(controls.active_actions_at(1.0) == on, "inactive at 1.0");
    o.check(controls.active_actions_at(1.99) == on, "inactive at 1.99");
    o.check(controls.active_actions_at(2.0).empty(), "active at 2.0");

    const auto late = must(bench, "add_control_sequence", {{"time", 31.0}, {"key", "Alpha1"}, {"hold_for", 2.0}});
    o.check(late.warning, "beyond-window entry not flagged");
    o.check(bench.scene().control().sequence().size() == 2, "beyond-window entry not retained");
    for (double t : {30.0, 31.0, 32.5})
        o.check(bench.scene().control().active_actions_at(t).empty(), fmt::format("beyond-window entry active at {}", t));
    return o;
}

// 8 -------------------------------------------------------------------------
Outcome transport_surrogate()
{
    Outcome o;
    const double hold = 3.0;
    const auto car = straight_drive_car(hold);
    const auto& wheel = car.scene().spec_of(car.scene().find_by_note("front east").at(0));
    const double rim_speed = *wheel.physical.wheel_rpm * M_PI * wheel.shape.x() / 60.0;
    const double expected = rim_speed * hold;

    evaluate::TransportOptions coarse;
    auto fine = coarse;
    fine.dt = coarse.dt / 2;
    const auto a = evaluate::simulate_transport(car.scene(), car.scene().control(), coarse);
    const auto b = evaluate::simulate_transport(car.scene(), car.scene().control(), fine);
    o.detail = fmt::format("displacement {:.4f} vs closed form {:.4f}; half-dt {:.4f}", a.max_displacement, expected,
                           b.max_displacement);
    o.check(a.status == evaluate::TransportStatus::ok && a.ground_wheels == 4, "car not on four wheels");
    o.check(std::abs(a.max_displacement - expected) <= 0.01 * expected, "closed form off by more than 1%");
    o.check(std::abs(a.max_displacement - b.max_displacement) <= 0.01 * a.max_displacement, "dt halving moves >1%");

    const auto spin = spinning_car(hold);
    const auto s = evaluate::simulate_transport(spin.scene(), spin.scene().control(), coarse);
    o.check(s.max_displacement < 0.1, fmt::format("opposed wheels moved {:.4f}", s.max_displacement));
    return o;
}

// 9 -------------------------------------------------------------------------
Outcome lift_surrogate()
{
    Outcome o;
    const auto engine = minimal_engine(true);
    evaluate::LiftOptions options;
    const auto r = evaluate::simulate_lift(engine.scene(), engine.scene().control(), options);
    double worst = 0.0;
    for (const auto& sample : r.trajectory.samples) {
        const double closed = 0.5 * (r.twr - 1.0) * options.gravity * sample.t * sample.t;
        if (closed > 1.0)
            worst = std::max(worst, std::abs(sample.position.z() - closed) / closed);
    }
    const double final_closed = 0.5 * (r.twr - 1.0) * options.gravity * options.duration * options.duration;
    o.detail = fmt::format("max height {:.3f} vs {:.3f}, worst relative error {:.2e}", r.max_height, final_closed, worst);
    o.check(worst <= 1e-3, "trajectory deviates from the closed form by more than 0.1%");
    o.check(std::abs(r.max_height - final_closed) <= 1e-3 * final_closed, "max height off");

    const auto cold = minimal_engine(false);
    const auto c = evaluate::simulate_lift(cold.scene(), cold.scene().control(), options);
    o.check(c.twr <= 1.0 && c.max_height == 0.0, fmt::format("TWR {} machine rose {}", c.twr, c.max_height));
    return o;
}

// 10 ------------------------------------------------------------------------
Outcome workflow_determinism()
{
    Outcome o;
    const auto task = tasks::load_builtin_task("lift_lv1");
    const auto run_once = [&] {
        auto backend = workflow::ScriptedBackend::from_json(four_block_script());
        return workflow::run_workflow(task, shared_catalog(), backend);
    };
    const auto first = run_once();
    const auto second = run_once();
    o.check(first.phase == workflow::RunPhase::done, "scripted run did not finish: " + first.failure_detail);
    o.check(first.scene().phase() == scene::Phase::finalized && first.scene().blocks().size() == 4, "scene is not a finalized 4-block machine");
    o.check(first.machine_file.find("<Machine") != std::string::npos &&
                first.machine_file == io::export_machine_file(first.scene(), task.name()),
            "machine file missing");
    o.check(workflow::transcript_hash(first.transcript) == workflow::transcript_hash(second.transcript) &&
                workflow::transcript_jsonl(first.transcript) == workflow::transcript_jsonl(second.transcript),
            "transcript not reproducible");
    o.check(first.scene().state_hash() == second.scene().state_hash(), "state hash not reproducible");

    const auto costs = workflow::account_costs(first);
    // planner 1, drafter 1, reviewer 1, guidance 6, builder 5
    o.check(costs == evaluate::CostCounters{140, 70, 14}, fmt::format("costs ({}, {}, {})", costs.input_tokens, costs.output_tokens, costs.llm_requests));

    auto never = four_block_script();
    never["reviewer"] = json::array({"Collisions remain near the east face."});
    never["drafter"] = json::array({"draft"});
    never["repeat_last"] = true;
    auto never_backend = workflow::ScriptedBackend::from_json(never);
    const auto stuck = workflow::run_workflow(task, shared_catalog(), never_backend);
    o.check(stuck.phase == workflow::RunPhase::failed && stuck.failure_code == workflow::WorkflowErrorCode::LoopBudgetExceeded &&
                stuck.failure_reason == workflow::FailureReason::budget,
            "never-approving script did not exhaust the loop budget");
    o.check(stuck.draft_rounds == 5, "draft budget is not 5 rounds");

    // Approval on round 3 of 5 takes six drafter/reviewer messages.
    auto third = four_block_script();
    third["drafter"] = json::array({"d1", "d2", "d3"});
    third["reviewer"] = json::array({"revise", "revise again", "TERMINATE"});
    auto third_backend = workflow::ScriptedBackend::from_json(third);
    workflow::WorkflowRun run(task, shared_catalog());
    workflow::run_plan_phase(run, third_backend);
    const auto before = run.transcript.size();
    workflow::run_draft_review_loop(run, third_backend);
    int replies = 0;
    for (auto i = before; i < run.transcript.size(); ++i)
        replies += run.transcript[i].role == "assistant";
    o.check(replies == 6 && run.phase == workflow::RunPhase::build_guidance && run.blueprint == "d3",
            fmt::format("round-3 approval took {} messages", replies));
    return o;
}

// 11 ------------------------------------------------------------------------
Outcome bench_aggregation()
{
    Outcome o;
    json samples = json::array();
    for (int i = 0; i < 64; ++i)
        samples.push_back(four_block_script(i % 16 < 5));
    const auto task = tasks::load_builtin_task("lift_lv1");
    bench::BenchOptions options;
    options.samples = 64;
    const auto report = bench::run_bench(task, shared_catalog(), bench::scripted_factory({{"samples", samples}}), options);
    const auto& s = report.summary;
    o.detail = fmt::format("{} successes of {}, rate {}%, mean parts {}", s.successes, s.n, num(s.success_rate), num(s.mean_parts));
    o.check(s.n == 64 && s.successes == 20, "success count");
    o.check(s.success_rate == 31.25, "success rate");
    o.check(s.mean_parts == 3.0, "mean parts differs from the scripted 3");
    return o;
}

// 12 ------------------------------------------------------------------------
Outcome tool_server_fuzz()
{
    Outcome o;
    io::ToolServer server(shared_catalog());
    std::mt19937_64 rng(777);
    const auto lines = fuzz_requests(rng, 1000);
    std::istringstream in([&] {
        std::string all;
        for (const auto& l : lines)
            all += l + "\n";
        return all;
    }());
    std::ostringstream out;
    server.serve(in, out);

    std::istringstream responses(out.str());
    std::string line;
    int count = 0, protocol_errors = 0, accepted = 0;
    while (std::getline(responses, line)) {
        ++count;
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.contains("ok")) {
            o.check(false, "unparseable response");
            continue;
        }
        protocol_errors += j["error"] == "ProtocolError";
        accepted += j["ok"].get<bool>();
    }
    o.check(count == static_cast<int>(lines.size()), fmt::format("{} responses for {} requests", count, lines.size()));
    for (const auto& name : server.session_names()) {
        const auto problems = server.session(name).scene().check_invariants();
        o.check(problems.empty(), "invariants broken in session " + name + ": " + (problems.empty() ? "" : problems[0]));
    }
    const auto alive = json::parse(server.handle_line(R"({"id":"ping","method":"state_hash"})"));
    o.check(alive["id"] == "ping" && alive["ok"] == true, "server not answering after the fuzz run");
    o.detail = fmt::format("{} responses, {} accepted, {} protocol errors", count, accepted, protocol_errors) +
               (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

struct Criterion {
    int number;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "catalog fidelity", 1, catalog_fidelity},
        {2, "worked examples", 1, worked_examples},
        {3, "TWR analytic", 1, twr_analytic},
        {4, "geometry oracle", 60, geometry_oracle},
        {5, "error taxonomy", 5, error_taxonomy},
        {6, "replay determinism", 30, replay_determinism},
        {7, "control semantics", 1, control_semantics},
        {8, "transport surrogate", 10, transport_surrogate},
        {9, "lift surrogate", 5, lift_surrogate},
        {10, "workflow determinism", 10, workflow_determinism},
        {11, "bench aggregation", 60, bench_aggregation},
        {12, "tool-server fuzz", 60, tool_server_fuzz},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (seconds > c.budget_seconds)
            outcome.check(false, fmt::format("over the {} s budget", c.budget_seconds));
        failed += !outcome.pass;
        std::printf("%s [%2d] %-22s %7.3f s  %s\n", outcome.pass ? "PASS" : "FAIL", c.number, c.name, seconds,
                    outcome.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
