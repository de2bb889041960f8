#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "vpmcf/io.hpp"
#include "vpmcf/scenario.hpp"

using namespace vpmcf;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

}  // namespace

TEST(Capsule, MatchesConstruction) {
  const auto c = make_capsule({0.1}, 512);
  const auto g = build_cache(c);
  EXPECT_NEAR(g.diameter, 1.0, 1e-3);
  EXPECT_NEAR(g.length, 2.1, 1e-2);
  EXPECT_NEAR(g.curvature[0], 2.0, 0.02);
  EXPECT_NEAR(g.curvature[256], 2.0, 0.02);
  for (double k : g.curvature) EXPECT_GE(k, 0.0);
  EXPECT_NEAR(c.vertices[0].y(), 0.0, 1e-12);
  EXPECT_NEAR(c.vertices[256].y(), 1.0, 1e-12);
  EXPECT_EQ(g.turning_number, 1);
}

TEST(Capsule, LengthTracksEps) {
  for (double eps : {0.05, 0.2, 0.5}) EXPECT_NEAR(build_cache(make_capsule({eps}, 256)).length, 2.0 + eps, 1e-2);
}

TEST(Capsule, RejectsBadEps) {
  EXPECT_EQ(kind_of([] { make_capsule({1.5}, 512); }), ErrorKind::BadParameters);
  EXPECT_EQ(kind_of([] { make_capsule({0.0}, 512); }), ErrorKind::BadParameters);
  EXPECT_EQ(kind_of([] { make_capsule({0.1}, 510); }), ErrorKind::BadParameters);
}

TEST(Circle, UnitCircle) {
  const auto c = make_circle({1.0}, 256);
  ASSERT_EQ(c.size(), 256u);
  for (const auto& v : c.vertices) EXPECT_NEAR(v.norm(), 1.0, 1e-14);
  EXPECT_GT(build_cache(c).area, 0.0);
}

TEST(Circle, PerturbationIsSeeded) {
  const auto a = make_circle({1.0, 0.05}, 128, 7), b = make_circle({1.0, 0.05}, 128, 7), d = make_circle({1.0, 0.05}, 128, 8);
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_NE(a.vertices, d.vertices);
  // four modes with amplitude at most 2 eps / (k + 2)
  for (const auto& v : a.vertices) EXPECT_NEAR(v.norm(), 1.0, 0.05 * (1.0 + 2.0 / 3.0 + 0.5 + 0.4));
}

TEST(Dumbbell, NeckWidth) {
  const auto c = make_dumbbell({0.2}, 512);
  EXPECT_NEAR((c.vertices[128] - c.vertices[384]).norm(), 0.2, 1e-6);
  EXPECT_EQ(build_cache(c).turning_number, 1);
}

TEST(Config, ParsesFullDocument) {
  const json j = json::parse(R"({
    "scenario": {"type": "capsule", "eps": 0.2},
    "flow": {"mode": "mcf", "multiplier": "analytic", "dt": 2e-5, "t_end": 0.5, "N": 256, "resample_every": 50, "cfl_guard": 1e-2},
    "output": "o", "snapshot_every": 500, "series_every": 5, "seed": 9})");
  const auto c = parse_config(j);
  ASSERT_TRUE(std::holds_alternative<CapsuleSpec>(c.scenario));
  EXPECT_DOUBLE_EQ(std::get<CapsuleSpec>(c.scenario).eps, 0.2);
  EXPECT_EQ(c.flow.mode, FlowMode::mcf);
  EXPECT_EQ(c.flow.multiplier, Multiplier::analytic);
  EXPECT_DOUBLE_EQ(c.flow.dt, 2e-5);
  EXPECT_EQ(c.flow.N, 256u);
  EXPECT_EQ(c.flow.resample_every, 50u);
  EXPECT_EQ(c.flow.record_every, 5u);
  EXPECT_EQ(c.snapshot_every, 500u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.output, "o");
}

TEST(Config, Defaults) {
  const auto c = parse_config(json::parse(R"({"scenario": {"type": "circle"}})"));
  EXPECT_EQ(c.flow.N, 512u);
  EXPECT_DOUBLE_EQ(c.flow.dt, 1e-5);
  EXPECT_EQ(c.seed, 0u);
  EXPECT_DOUBLE_EQ(std::get<CircleSpec>(c.scenario).radius, 1.0);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  const char* bad[] = {
      R"({"scenario": {"type": "circle"}, "outptu": "x"})",
      R"({"scenario": {"type": "circle", "r": 2}})",
      R"({"scenario": {"type": "circle"}, "flow": {"dtt": 1}})",
      R"({"scenario": {"type": "hexagon"}})",
      R"({"scenario": {"type": "capsule", "eps": 1.5}})",
      R"({"scenario": {"type": "ellipse", "a": -1}})",
      R"({"scenario": {"type": "circle"}, "flow": {"mode": "willmore"}})",
      R"({"scenario": {"type": "circle"}, "flow": {"N": 0}})",
      R"({"flow": {}})",
  };
  for (const char* s : bad) EXPECT_EQ(kind_of([&] { parse_config(json::parse(s)); }), ErrorKind::BadParameters) << s;
}

TEST(Config, MakeScenarioUsesN) {
  auto c = parse_config(json::parse(R"({"scenario": {"type": "ellipse", "a": 3, "b": 1}, "flow": {"N": 64}})"));
  EXPECT_EQ(make_scenario(c).size(), 64u);
  c.flow.N = 8;
  EXPECT_EQ(kind_of([&] { make_scenario(c); }), ErrorKind::TooFewVertices);
}

TEST(Io, SnapshotRoundTripIsExact) {
  auto c = make_ellipse({2.0, 1.0}, 64);
  c.time = 0.123456789012345678;
  std::stringstream ss;
  write_snapshot(ss, c);
  const auto r = read_snapshot(ss);
  EXPECT_EQ(r.time, c.time);
  EXPECT_EQ(r.vertices, c.vertices);
}

TEST(Io, RejectsMalformedSnapshot) {
  std::stringstream a("# t=0 N=3\n1,2\n3,4\n");
  EXPECT_EQ(kind_of([&] { read_snapshot(a); }), ErrorKind::Io);
  std::stringstream b("t=0\n");
  EXPECT_EQ(kind_of([&] { read_snapshot(b); }), ErrorKind::Io);
  std::stringstream d("# t=0 N=1\n1;2\n");
  EXPECT_EQ(kind_of([&] { read_snapshot(d); }), ErrorKind::Io);
}

TEST(Io, FileScenarioResamples) {
  const auto dir = std::filesystem::temp_directory_path() / "vpmcf_scenario_test";
  std::filesystem::create_directories(dir);
  write_snapshot(dir / "shape.csv", make_ellipse({2.0, 1.0}, 100));
  auto c = parse_config(json{{"scenario", {{"type", "file"}, {"path", (dir / "shape.csv").string()}}}, {"flow", {{"N", 80}}}});
  const auto curve = make_scenario(c);
  EXPECT_EQ(curve.size(), 80u);
  EXPECT_NEAR(build_cache(curve).area, 2.0 * std::numbers::pi, 1e-2);
  std::filesystem::remove_all(dir);
}
