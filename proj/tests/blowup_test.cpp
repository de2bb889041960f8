#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vpmcf/blowup.hpp"
#include "vpmcf/diagnostics.hpp"
#include "vpmcf/scenario.hpp"

using namespace vpmcf;

namespace {

FlowConfig config(double dt, double t_end, std::size_t n, std::size_t record, FlowMode mode = FlowMode::vpmcf) {
  FlowConfig c;
  c.mode = mode;
  c.dt = dt;
  c.t_end = t_end;
  c.N = n;
  c.record_every = record;
  return c;
}

const FlowHistory& ellipse_run() {
  static const FlowHistory h = run(make_ellipse({2.0, 1.0}, 128), config(1e-4, 0.5, 128, 50));
  return h;
}

const FlowHistory& mcf_run() {
  static const FlowHistory h = run(make_circle({1.0}, 256), config(1e-5, 0.6, 256, 1000, FlowMode::mcf));
  return h;
}

const FlowHistory& perturbed_run() {
  static const FlowHistory h = run(make_circle({1.0, 0.05}, 256, 7), config(1e-5, 0.6, 256, 100, FlowMode::mcf));
  return h;
}

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

TEST(Rescale, IdentityFrame) {
  const auto& h = ellipse_run();
  const double T = h.back().curve.time;
  const auto r = rescale(h, {Vec2::Zero(), T, 1.0});
  ASSERT_EQ(r.snapshots.size(), h.snapshots.size());
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    EXPECT_EQ(r.snapshots[k].curve.vertices, h.snapshots[k].curve.vertices);
    EXPECT_NEAR(r.snapshots[k].curve.time, h.snapshots[k].curve.time - T, 1e-15);
    EXPECT_EQ(r.snapshots[k].i2, h.snapshots[k].i2);
  }
}

TEST(Rescale, ScalesGeometry) {
  const auto& h = ellipse_run();
  const RescalingFrame f{Vec2(0.3, -0.2), 0.25, 3.0};
  const auto r = rescale(h, f);
  EXPECT_LT(scaled_cache_mismatch(h, r, f), 1e-10);
  EXPECT_DOUBLE_EQ(r.config.dt, 9.0 * h.config.dt);
  EXPECT_NEAR(r.front().curve.time, -9.0 * 0.25, 1e-14);
  EXPECT_NEAR(r.back().curve.time, 0.0, 1e-12);
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) EXPECT_NEAR(r.snapshots[k].hbar, h.snapshots[k].hbar / 3.0, 1e-12);
}

// rescaling twice equals one rescaling with the composed frame
TEST(Rescale, Composition) {
  const auto& h = ellipse_run();
  const RescalingFrame f1{Vec2(0.1, 0.2), 0.4, 2.0}, f2{Vec2(-0.5, 0.3), -0.2, 1.5};
  const auto twice = rescale(rescale(h, f1), f2);
  const RescalingFrame f{f1.center + f2.center / f1.lambda, f1.T + f2.T / (f1.lambda * f1.lambda), f1.lambda * f2.lambda};
  const auto once = rescale(h, f);
  ASSERT_EQ(twice.snapshots.size(), once.snapshots.size());
  for (std::size_t k = 0; k < once.snapshots.size(); ++k) {
    EXPECT_NEAR(twice.snapshots[k].curve.time, once.snapshots[k].curve.time, 1e-12);
    for (std::size_t i = 0; i < once.snapshots[k].curve.size(); i += 9)
      EXPECT_NEAR((twice.snapshots[k].curve.vertices[i] - once.snapshots[k].curve.vertices[i]).norm(), 0.0, 1e-12);
  }
}

TEST(Rescale, Errors) {
  const auto& h = ellipse_run();
  EXPECT_EQ(kind_of([&] { rescale(h, {Vec2::Zero(), -1.0, 1.0}); }), ErrorKind::EmptyWindow);
  EXPECT_EQ(kind_of([&] { rescale(h, {Vec2::Zero(), 0.1, 0.0}); }), ErrorKind::BadParameters);
  EXPECT_EQ(kind_of([&] { rescale(h, {Vec2::Zero(), 0.1, -2.0}); }), ErrorKind::BadParameters);
}

TEST(PsiInvariance, HoldsForSeveralFrames) {
  const auto& h = ellipse_run();
  for (double lam : {0.5, 1.0, 3.0, 10.0}) {
    for (double T : {0.1, 0.3, 0.5}) {
      const auto p = psi_invariance_check(h, {Vec2(1.0, 1.0), T, lam});
      EXPECT_TRUE(p.ok()) << lam << " " << T << " " << p.discrepancy;
      EXPECT_NEAR(p.source_integral, h.snapshots[nearest_snapshot(h, T)].i2, 1e-6);
    }
  }
}

TEST(TypeI, ShrinkingCircle) {
  const auto& h = mcf_run();
  const auto t = classify_type(h, h.singular_time);
  EXPECT_EQ(t.type, SingularityType::TypeI);
  // kappa^2 (T - t) = 1/2 for the exact circle
  EXPECT_NEAR(t.constant, 0.5, 0.025);
  ASSERT_EQ(t.hamilton.size(), 10u);
  for (std::size_t i = 1; i < t.hamilton.size(); ++i) {
    EXPECT_GE(t.hamilton[i].curvature, t.hamilton[i - 1].curvature);
    EXPECT_GE(t.hamilton[i].value, t.hamilton[i - 1].value - 1e-12);
  }
}

TEST(TypeI, HamiltonPointIsMaximal) {
  const auto& h = mcf_run();
  const double T = h.singular_time, off = T / 4.0;
  const auto p = hamilton_point(h, T, off);
  for (const auto& sn : h.snapshots) {
    if (!(sn.curve.time < T - off)) continue;
    for (double k : sn.cache.curvature) EXPECT_LE(k * k * (T - off - sn.curve.time), p.value + 1e-15);
  }
}

TEST(TypeI, NeedsSingularity) {
  EXPECT_EQ(kind_of([&] { classify_type(ellipse_run(), 1.0); }), ErrorKind::NoSingularity);
}

TEST(Shrinker, ExactCircleHasNoResidual) {
  ClosedCurve c;
  for (int i = 0; i < 1024; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 1024.0;
    c.vertices.emplace_back(std::sqrt(2.0) * std::cos(th), std::sqrt(2.0) * std::sin(th));
  }
  EXPECT_LT(shrinker_residual(c, -1.0), 1e-5);
  EXPECT_GT(shrinker_residual(c, -0.5), 0.1);
  EXPECT_EQ(kind_of([&] { shrinker_residual(c, 0.0); }), ErrorKind::NonNegativeTau);
}

TEST(Shrinker, PerturbedCircleRoundsOff) {
  const auto& h = perturbed_run();
  ASSERT_EQ(h.status, RunStatus::SingularityReached);
  const double T = h.singular_time;
  Vec2 p = Vec2::Zero();
  for (const auto& v : h.back().curve.vertices) p += v;
  p /= static_cast<double>(h.back().curve.size());
  double prev = INFINITY;
  for (int k = 0; k < 5; ++k) {
    const auto& sn = h.snapshots[nearest_snapshot(h, T - 0.5 * std::ldexp(1.0, -k))];
    const double lam = 1.0 / std::sqrt(2.0 * (T - sn.curve.time));
    const double res = shrinker_residual(transformed(sn.curve, lam, -p), -0.5);
    EXPECT_LT(res, prev) << k;
    prev = res;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(HbarDecay, ConstantOnStationaryCircle) {
  const auto h = run(make_circle({1.0}, 64), config(1e-3, 1.0, 64, 50));
  const auto r = rescale(h, {Vec2::Zero(), 1.0, 1.0});
  EXPECT_TRUE(hbar_decay_check(r, -0.9).empty());
  EXPECT_EQ(kind_of([&] { hbar_decay_check(r, -0.01); }), ErrorKind::EmptyWindow);
  const auto big = rescale(h, {Vec2::Zero(), 2.0, 1.0});
  EXPECT_EQ(kind_of([&] { hbar_decay_check(big); }), ErrorKind::NormalizationFailed);
}
