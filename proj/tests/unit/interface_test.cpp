// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "buildarena/bench.hpp"
#include "buildarena/machine_file.hpp"
#include "buildarena/native_format.hpp"
#include "buildarena/task_config.hpp"
#include "buildarena/tool_server.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace buildarena;
using namespace buildarena::testing;
using json = nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::filesystem::path kData = BUILDARENA_TEST_DATA;

std::size_t count_of(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1))
        ++n;
    return n;
}

// ---- native documents

TEST(NativeFormat, FreshSceneRoundTrips)
{
    actions::Workbench bench(shared_catalog());
    const auto doc = io::export_native(bench);
    const auto back = io::import_native(doc, shared_catalog());
    EXPECT_FALSE(back.scene().started());
    EXPECT_EQ(io::export_native(back), doc);
}

TEST(NativeFormat, FiftyBlockSceneRoundTrips)
{
    const auto bench = random_trajectory(42, 80);
    ASSERT_GE(bench.scene().blocks().size(), 20u);
    const auto doc = io::export_native(bench);
    const auto back = io::import_native(doc, shared_catalog());
    EXPECT_EQ(back.scene().state_hash(), bench.scene().state_hash());
    EXPECT_EQ(back.scene().next_block_id(), bench.scene().next_block_id());
    EXPECT_EQ(back.log().size(), bench.log().size());
    EXPECT_EQ(io::export_native(back), doc);
    EXPECT_TRUE(back.scene().check_invariants().empty());
}

TEST(NativeFormat, ControlsAndSubstructuresSurvive)
{
    auto bench = straight_drive_car();
    must(bench, "finalize");
    must(bench, "save_substructure", {{"name", "car"}});
    const auto back = io::import_native(io::export_native(bench), shared_catalog());
    EXPECT_EQ(back.scene().control(), bench.scene().control());
    ASSERT_EQ(back.substructures().count("car"), 1u);
    EXPECT_EQ(back.substructures().at("car").state_hash(), bench.scene().state_hash());
}

TEST(NativeFormat, CatalogMismatchIsDetected)
{
    auto doc = json::parse(io::export_native(four_wheel_car()));
    doc["catalog_hash"] = "0000000000000000";
    try {
        io::import_native(doc.dump(), shared_catalog());
        FAIL() << "mismatch accepted";
    } catch (const io::CatalogMismatch& e) {
        EXPECT_EQ(e.found, "0000000000000000");
        EXPECT_EQ(e.expected, shared_catalog()->content_hash());
    }
}

TEST(NativeFormat, BadDocumentsAreRejected)
{
    auto doc = json::parse(io::export_native(four_wheel_car()));
    auto wrong_version = doc;
    wrong_version["version"] = 99;
    EXPECT_THROW(io::import_native(wrong_version.dump(), shared_catalog()), io::DocumentError);
    auto wrong_format = doc;
    wrong_format["format"] = "something.else";
    EXPECT_THROW(io::import_native(wrong_format.dump(), shared_catalog()), io::DocumentError);
    EXPECT_THROW(io::import_native("{not json", shared_catalog()), io::DocumentError);
}

TEST(NativeFormat, DoublesSurviveBitForBit)
{
    for (std::uint64_t seed : {71u, 79u, 3u}) {
        const auto bench = random_trajectory(seed, 100);
        const auto back = io::import_native(io::export_native(bench), shared_catalog());
        for (const auto& [id, b] : bench.scene().blocks()) {
            const auto& other = back.scene().block(id);
            EXPECT_EQ(b.pose.position, other.pose.position);
            EXPECT_EQ(geometry::canonical(b.pose.orientation).coeffs(), other.pose.orientation.coeffs());
        }
    }
}

// ---- machine files

TEST(MachineFile, RequiresFinalizedScene)
{
    EXPECT_THROW(io::export_machine_file(four_wheel_car().scene()), io::UnfinalizedScene);
}

TEST(MachineFile, SingleBlock)
{
    actions::Workbench bench(shared_catalog());
    must(bench, "start");
    must(bench, "finalize");
    const auto xml = io::export_machine_file(bench.scene(), "solo");
    EXPECT_EQ(count_of(xml, "<Block "), 1u);
    EXPECT_NE(xml.find("name=\"solo\""), std::string::npos);
    EXPECT_EQ(xml.find("idVerified"), std::string::npos);
}

TEST(MachineFile, WheelKeyBindingMatchesGolden)
{
    actions::Workbench bench(shared_catalog());
    for (const auto& line : {
             R"({"name":"start","arguments":{"note":"core"}})",
             R"({"name":"attach_block_to","arguments":{"base_block":0,"face":"east","new_block":"PoweredWheel","note":"drive"}})",
             R"({"name":"flip_block","arguments":{"block":1}})",
             R"({"name":"bind_key","arguments":{"key":"UpArrow","action":"spin_forward","block":1}})",
             R"({"name":"add_control_sequence","arguments":{"time":0,"key":"UpArrow","hold_for":2.5,"motion_action":"roll"}})",
             R"({"name":"finalize"})"}) {
        const auto j = json::parse(line);
        must(bench, j["name"], j.value("arguments", json::object()));
    }
    EXPECT_EQ(io::export_machine_file(bench.scene(), "wheel"), slurp(kData / "golden/wheel_binding.machine.xml"));
}

TEST(MachineFile, EscapesMarkup)
{
    actions::Workbench bench(shared_catalog());
    must(bench, "start", {{"note", "a<b & \"c\""}});
    must(bench, "finalize");
    const auto xml = io::export_machine_file(bench.scene(), "x");
    EXPECT_NE(xml.find("note=\"a&lt;b &amp; &quot;c&quot;\""), std::string::npos) << xml;
}

TEST(MachineFile, GameFrameIsAConsistentReflection)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 500; ++i) {
        const Quat q = random_rotation(rng);
        const Vec3 v(u(rng), u(rng), u(rng));
        const Vec3 lhs = io::to_game_frame(q) * io::to_game_frame(v);
        EXPECT_TRUE(lhs.isApprox(io::to_game_frame(Vec3(q * v)), 1e-12));
    }
    EXPECT_EQ(io::to_game_frame(Vec3(1, 2, 3)), Vec3(1, 3, 2));
}

// ---- tool server

TEST(ToolServer, BuildAndSummarize)
{
    io::ToolServer server(shared_catalog());
    auto r1 = json::parse(server.handle_line(R"({"id": 1, "name": "start"})"));
    EXPECT_TRUE(r1["ok"]);
    EXPECT_EQ(r1["id"], 1);
    auto r2 = json::parse(server.handle_line(
        R"({"id": "two", "name": "attach_block_to", "arguments": {"base_block": 0, "face": "top", "new_block": "SmallWoodenBlock"}})"));
    EXPECT_TRUE(r2["ok"]);
    EXPECT_EQ(r2["state_delta"]["created_blocks"], json::array({1}));
    auto r3 = json::parse(server.handle_line(R"({"id": 3, "name": "get_machine_summary"})"));
    EXPECT_NE(r3["description"].get<std::string>().find("2 block(s)"), std::string::npos);
    auto r4 = json::parse(server.handle_line(R"({"id": 4, "method": "state_hash"})"));
    EXPECT_EQ(r4["description"], server.session("default").scene().state_hash());
}

TEST(ToolServer, GarbageGetsNullId)
{
    io::ToolServer server(shared_catalog());
    const auto r = json::parse(server.handle_line("\xc2\xa1\xc2\xa1\xc2\xa1"));
    EXPECT_TRUE(r["id"].is_null());
    EXPECT_FALSE(r["ok"]);
    EXPECT_EQ(r["error"], "ProtocolError");
}

TEST(ToolServer, EngineErrorsKeepTheirCode)
{
    io::ToolServer server(shared_catalog());
    server.handle_line(R"({"name": "start"})");
    const auto r = json::parse(server.handle_line(R"({"id": 9, "name": "remove_block", "arguments": {"block": 0}})"));
    EXPECT_EQ(r["error"], "StartingBlockProtected");
    EXPECT_EQ(r["id"], 9);
}

TEST(ToolServer, SessionsAreIsolated)
{
    io::ToolServer server(shared_catalog());
    server.handle_line(R"({"session": "a", "name": "start"})");
    const auto r = json::parse(server.handle_line(R"({"session": "b", "name": "get_part_count"})"));
    EXPECT_TRUE(r["ok"]);
    EXPECT_TRUE(server.session("a").scene().started());
    EXPECT_FALSE(server.session("b").scene().started());
    server.handle_line(R"({"session": "a", "method": "close"})");
    EXPECT_THROW(server.session("a"), std::out_of_range);
}

TEST(ToolServer, ServeAnswersEveryNonEmptyLine)
{
    io::ToolServer server(shared_catalog());
    std::istringstream in("{\"id\":1,\"name\":\"start\"}\n\n   \n{\"id\":2,\"method\":\"check_invariants\"}\r\n");
    std::ostringstream out, transcript;
    server.serve(in, out, &transcript);
    std::vector<json> responses;
    std::istringstream lines(out.str());
    for (std::string line; std::getline(lines, line);)
        responses.push_back(json::parse(line));
    ASSERT_EQ(responses.size(), 3u);
    EXPECT_TRUE(responses[0]["ok"]);
    EXPECT_EQ(responses[1]["error"], "ProtocolError");
    EXPECT_TRUE(responses[2]["ok"]);
    EXPECT_EQ(count_of(transcript.str(), "\n"), 3u);
}

// ---- task configs

TEST(TaskConfig, BuiltinsParse)
{
    const auto names = tasks::builtin_task_names();
    EXPECT_EQ(names.size(), 9u);
    for (const auto& name : names) {
        const auto task = tasks::load_builtin_task(name);
        EXPECT_EQ(task.name(), name);
        EXPECT_FALSE(task.prompt.empty());
    }
}

TEST(TaskConfig, MissingThresholdNamesTheField)
{
    auto doc = json::parse(slurp(kData.parent_path() / "assets/tasks/lift_lv1.json"));
    doc["success"].erase("threshold");
    try {
        tasks::parse_task_config(doc.dump());
        FAIL() << "accepted";
    } catch (const tasks::ConfigError& e) {
        EXPECT_EQ(e.field, "success.threshold");
    }
}

TEST(TaskConfig, RejectsBadValues)
{
    const auto base = json::parse(slurp(kData.parent_path() / "assets/tasks/lift_lv1.json"));
    auto level = base;
    level["level"] = 4;
    EXPECT_THROW(tasks::parse_task_config(level.dump()), tasks::ConfigError);
    auto comparison = base;
    comparison["success"]["comparison"] = "lt";
    EXPECT_THROW(tasks::parse_task_config(comparison.dump()), tasks::ConfigError);
    EXPECT_THROW(tasks::parse_task_config("[]"), tasks::ConfigError);
    EXPECT_THROW(tasks::load_builtin_task("fly_lv1"), tasks::ConfigError);
}

TEST(TaskConfig, EvaluatesLiftScene)
{
    const auto task = tasks::load_builtin_task("lift_lv1");
    const auto hot = tasks::evaluate_task(task, minimal_engine(true).scene());
    const auto cold = tasks::evaluate_task(task, minimal_engine(false).scene());
    EXPECT_TRUE(hot.success);
    EXPECT_FALSE(cold.success);
    EXPECT_EQ(hot.parts, 2);
}

// ---- bench

TEST(Bench, SingleSample)
{
    bench::BenchOptions options;
    options.samples = 1;
    const auto report = bench::run_bench(tasks::load_builtin_task("lift_lv1"), shared_catalog(),
                                         bench::scripted_factory(four_block_script()), options);
    ASSERT_EQ(report.samples.size(), 1u);
    EXPECT_EQ(report.summary.n, 1);
    EXPECT_EQ(report.summary.successes, 1);
    EXPECT_DOUBLE_EQ(report.summary.success_rate, 100.0);
    EXPECT_EQ(report.samples[0].record.parts, 3);
    EXPECT_EQ(report.samples[0].record.cost, (evaluate::CostCounters{140, 70, 14}));
}

TEST(Bench, ParallelMatchesSerial)
{
    const json doc{{"samples", {four_block_script(true), four_block_script(false)}}};
    bench::BenchOptions serial;
    serial.samples = 6;
    bench::BenchOptions parallel = serial;
    parallel.jobs = 3;
    const auto task = tasks::load_builtin_task("lift_lv1");
    const auto a = bench::run_bench(task, shared_catalog(), bench::scripted_factory(doc), serial);
    const auto b = bench::run_bench(task, shared_catalog(), bench::scripted_factory(doc), parallel);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(a.samples[i].state_hash, b.samples[i].state_hash);
        EXPECT_EQ(a.samples[i].transcript_hash, b.samples[i].transcript_hash);
    }
    EXPECT_EQ(a.summary.successes, 3);
}

TEST(Bench, WritesReports)
{
    bench::BenchOptions options;
    options.samples = 2;
    const auto report = bench::run_bench(tasks::load_builtin_task("lift_lv1"), shared_catalog(),
                                         bench::scripted_factory(four_block_script()), options);
    const auto dir = std::filesystem::temp_directory_path() / "buildarena_bench_test";
    std::filesystem::remove_all(dir);
    bench::write_reports(report, dir);
    for (const char* f : {"records.csv", "summary.csv", "summary.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    EXPECT_EQ(count_of(slurp(dir / "records.csv"), "\n"), 3u);
    std::filesystem::remove_all(dir);
}

}  // namespace
