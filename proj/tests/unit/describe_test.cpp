// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "buildarena/describe.hpp"
#include "../support/fixtures.hpp"

using namespace buildarena;
using namespace buildarena::testing;

namespace {

std::string read_golden(const std::string& name)
{
    std::ifstream in(std::string(BUILDARENA_TEST_DATA) + "/golden/" + name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool contains(std::string_view text, std::string_view fragment) { return text.find(fragment) != std::string::npos; }

TEST(Describe, FourWheelSummaryMatchesGolden)
{
    const auto text = describe::machine_summary(four_wheel_car().scene()) + "\n";
    EXPECT_EQ(text, read_golden("four_wheel_summary.txt"));
}

TEST(Describe, SummaryIsStableAcrossCalls)
{
    const auto bench = straight_drive_car();
    EXPECT_EQ(describe::machine_summary(bench.scene()), describe::machine_summary(bench.scene()));
    EXPECT_TRUE(contains(describe::machine_summary(bench.scene()), "4 binding(s), 1 sequence entry"));
}

TEST(Describe, UnstartedSummary)
{
    actions::Workbench bench(shared_catalog());
    EXPECT_EQ(describe::machine_summary(bench.scene()), std::string(describe::template_text("summary.unstarted")) + "\n");
}

TEST(Describe, FaceOccupiedNamesTheOccupant)
{
    auto bench = four_wheel_car();
    const auto r = act(bench, "attach_block_to", {{"base_block", 0}, {"face", "north"}, {"new_block", "SmallWoodenBlock"}});
    ASSERT_EQ(r.error, ErrorCode::FaceOccupied);
    EXPECT_TRUE(contains(r.description, "north face of block #0")) << r.description;
    EXPECT_TRUE(contains(r.description, "#1")) << r.description;
    EXPECT_TRUE(contains(r.description, "get_free_faces"));
}

TEST(Describe, OverlapNamesBothBlocks)
{
    auto bench = four_wheel_car();
    const auto r = act(bench, "attach_block_to", {{"base_block", 1}, {"face", "east"}, {"new_block", "PoweredWheel"}});
    ASSERT_EQ(r.error, ErrorCode::OverlapConflict);
    EXPECT_TRUE(contains(r.description, "would overlap block")) << r.description;
    EXPECT_TRUE(contains(r.description, "PoweredWheel")) << r.description;
}

TEST(Describe, ExcessConnectionStatesCap)
{
    auto bench = four_wheel_car();
    must(bench, "connect_blocks", {{"block_a", 0}, {"face_a", "east"}, {"block_b", 1}, {"face_b", "east"}});
    const auto r = act(bench, "connect_blocks", {{"block_a", 0}, {"face_a", "east"}, {"block_b", 3}, {"face_b", "east"}});
    ASSERT_EQ(r.error, ErrorCode::ExcessConnection);
    EXPECT_TRUE(contains(r.description, "already holds 1 connector(s)")) << r.description;
}

TEST(Describe, HeatedCannonMentionsSteam)
{
    const auto hot = minimal_engine(true);
    const auto cold = minimal_engine(false);
    EXPECT_TRUE(contains(describe::function_phrase(hot.scene(), 1), "steam")) << describe::function_phrase(hot.scene(), 1);
    EXPECT_TRUE(contains(describe::function_phrase(cold.scene(), 1), "water mode"));
    EXPECT_FALSE(contains(describe::function_phrase(cold.scene(), 1), "steam"));
    EXPECT_TRUE(contains(describe::function_phrase(hot.scene(), 1), "jetting down"));
}

TEST(Describe, TorchHasNoFaces)
{
    const auto bench = minimal_engine(true);
    EXPECT_TRUE(contains(describe::block_detail(bench.scene(), 2), describe::template_text("detail.no_faces")));
    EXPECT_TRUE(contains(describe::free_faces_text(bench.scene(), 2), "has no free faces"));
}

TEST(Describe, BlockRefAndFaceNames)
{
    CarIds ids;
    const auto bench = four_wheel_car(&ids);
    EXPECT_EQ(describe::block_ref(bench.scene(), ids.front_east), "#5 PoweredWheel \"front east wheel\"");
    const auto face = bench.scene().resolve_face(0, "top");
    ASSERT_TRUE(face);
    EXPECT_EQ(describe::face_name(bench.scene(), 0, *face), "top");
}

TEST(Describe, RenderLeavesUnknownPlaceholders)
{
    EXPECT_EQ(describe::render("ok.phase", {{"phase", "refine"}}), "Entered the refine phase.");
    EXPECT_EQ(describe::render("ok.phase", {}), "Entered the {phase} phase.");
    EXPECT_THROW(describe::template_text("no.such.key"), std::out_of_range);
}

TEST(Describe, EveryErrorCodeHasATemplate)
{
    for (ErrorCode code : kAllErrorCodes) {
        const auto text = describe::error_message(code, nlohmann::json::object());
        EXPECT_EQ(text.rfind(std::string(to_string(code)) + ":", 0), 0u) << text;
    }
}

TEST(Describe, DirectionText)
{
    EXPECT_EQ(describe::direction_text(Vec3::UnitX()), "east");
    EXPECT_EQ(describe::direction_text(-Vec3::UnitZ()), "down");
}

}  // namespace
