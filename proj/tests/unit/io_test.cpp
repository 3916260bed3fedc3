#include <gtest/gtest.h>

#include <sstream>

#include "socnav/error.hpp"
#include "socnav/svg.hpp"
#include "socnav/trajectory_log.hpp"

using namespace socnav;

namespace {

EpisodeOutcome short_episode() {
    CrowdSpec crowd;
    crowd.policy = PolicyTag::NoisyOrca;
    crowd.rho_max = 0.6;
    WorldState w = generate_scenario(ScenarioKind::CircleCrossing, 3, 4, {}, crowd);
    w.time_limit = 2.0;
    StopPolicy stop;
    return run_episode(w, stop, EpisodeMode::Evaluation, true);
}

}  // namespace

TEST(TrajectoryLog, RoundTrip) {
    const EpisodeOutcome out = short_episode();
    std::stringstream ss;
    write_trajectory_log(ss, 7, out);
    const auto records = read_trajectory_log(ss);
    ASSERT_EQ(records.size(), out.trajectory.size() * 4);
    const auto expected = trajectory_records(7, out);
    ASSERT_EQ(records.size(), expected.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(records[i].episode, 7);
        EXPECT_EQ(records[i].agent, expected[i].agent);
        EXPECT_EQ(records[i].px, expected[i].px);
        EXPECT_EQ(records[i].rho, expected[i].rho);
        EXPECT_EQ(records[i].policy, expected[i].policy);
    }
    EXPECT_FALSE(records[0].rho.has_value());
    EXPECT_TRUE(records[1].rho.has_value());
}

TEST(TrajectoryLog, FixedKeyOrder) {
    TrajectoryRecord r;
    r.policy = "orca";
    std::ostringstream out;
    write_trajectory_record(out, r);
    const std::string line = out.str();
    const char* keys[] = {"\"episode\"", "\"step\"", "\"agent\"", "\"px\"", "\"py\"", "\"vx\"",
                          "\"vy\"", "\"radius\"", "\"rho\"", "\"policy\"", "\"rho_hat\""};
    std::size_t pos = 0;
    for (const char* k : keys) {
        const auto at = line.find(k, pos);
        ASSERT_NE(at, std::string::npos) << k;
        pos = at;
    }
}

TEST(TrajectoryLog, MalformedLineReportsLineNumber) {
    const EpisodeOutcome out = short_episode();
    std::stringstream ss;
    write_trajectory_log(ss, 0, out);
    std::string text = ss.str();
    const auto second = text.find('\n') + 1;
    const auto third = text.find('\n', second) + 1;
    text.insert(third, "{not json\n");
    std::istringstream in(text);
    try {
        read_trajectory_log(in);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Svg, RampEndpoints) {
    EXPECT_EQ(ramp_color(0.0), "#2864e6");
    EXPECT_EQ(ramp_color(1.0), "#fa46aa");
    EXPECT_EQ(ramp_color(7.0), ramp_color(1.0));
}

TEST(Svg, OnePolylinePerAgent) {
    const EpisodeOutcome out = short_episode();
    const std::string svg = render_svg(trajectory_records(0, out));
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    std::size_t count = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
    EXPECT_EQ(count, 4u);
    EXPECT_NE(svg.find("stroke=\"#000000\""), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
