#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "vpmcf/diagnostics.hpp"
#include "vpmcf/scenario.hpp"

using namespace vpmcf;
constexpr double kPi = std::numbers::pi;

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

const FlowHistory& circle_run() {
  static const FlowHistory h = run(make_circle({1.0}, 128), config(1e-3, 1.0, 128, 1));
  return h;
}

const FlowHistory& mcf_run() {
  static const FlowHistory h = run(make_circle({1.0}, 256), config(1e-5, 0.6, 256, 1000, FlowMode::mcf));
  return h;
}

const FlowHistory& ellipse_run() {
  static const FlowHistory h = run(make_ellipse({2.0, 1.0}, 128), config(1e-4, 0.5, 128, 50));
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

TEST(Series, ColumnsAndCsv) {
  const auto s = series(ellipse_run());
  ASSERT_EQ(s.size(), ellipse_run().snapshots.size());
  EXPECT_DOUBLE_EQ(s.rows.front().psi, 1.0);
  EXPECT_NEAR(s.rows.front().diam, 4.0, 1e-3);
  for (std::size_t k = 1; k < s.size(); ++k) {
    EXPECT_LE(s.rows[k].psi, s.rows[k - 1].psi);
    EXPECT_NEAR(s.rows[k].psi, std::exp(-0.5 * s.rows[k].i2), 1e-15);
  }
  std::ostringstream os;
  write_series_csv(os, s);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,length,area,kappa_bar,i2,psi,diam,iso_ratio,max_abs_kappa,ddiam_dt");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), s.size() + 1);
}

TEST(Series, McfHasNoMultiplier) {
  const auto s = series(mcf_run());
  for (const auto& r : s.rows) {
    EXPECT_EQ(r.kappa_bar, 0.0);
    EXPECT_EQ(r.psi, 1.0);
  }
}

TEST(DiameterCheck, NoViolationsOnFlows) {
  EXPECT_TRUE(diameter_derivative_check(series(circle_run())).empty());
  EXPECT_TRUE(diameter_derivative_check(series(ellipse_run())).empty());
}

TEST(DiameterCheck, FlagsSyntheticGrowth) {
  auto s = series(ellipse_run());
  s.rows[3].ddiam_dt = 100.0;
  const auto bad = diameter_derivative_check(s);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0], 3u);
}

TEST(L2Bound, CertificatesPass) {
  for (const auto* h : {&circle_run(), &ellipse_run()}) {
    const auto certs = l2_multiplier_bound_check(series(*h), h->initial_area);
    ASSERT_EQ(certs.size(), 2u);
    for (const auto& c : certs) EXPECT_TRUE(c.pass) << c.line();
  }
}

TEST(L2Bound, FailsWhenI2Inflated) {
  auto s = series(ellipse_run());
  s.rows.back().i2 = 1e6;
  EXPECT_FALSE(l2_multiplier_bound_check(s, ellipse_run().initial_area)[0].pass);
  EXPECT_EQ(kind_of([&] { l2_multiplier_bound_check(s, 0.0); }), ErrorKind::ZeroVolume);
}

TEST(Certificate, LineFormat) {
  Certificate c("x");
  c.update(0.5);
  c.update(0.25);
  EXPECT_EQ(c.line(), "CERT x PASS 2.500000e-01");
  c.update(-1.0);
  EXPECT_EQ(c.line(), "CERT x FAIL -1.000000e+00");
  c = Certificate("y");
  c.update(NAN);
  EXPECT_FALSE(c.pass);
}

// closed form of the kernel integral over a circle of radius R about its centre
TEST(Kernel, CircleClosedForm) {
  Snapshot sn;
  const std::size_t n = 4096;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * static_cast<double>(i) / n;
    sn.curve.vertices.emplace_back(0.7 * std::cos(th), 0.7 * std::sin(th));
  }
  sn.cache = build_cache(sn.curve);
  for (double s : {0.05, 0.2, 1.0}) {
    const double exact = 2.0 * kPi * 0.7 * std::exp(-0.49 / (4.0 * s)) / std::sqrt(4.0 * kPi * s);
    EXPECT_NEAR(kernel_integral(sn, Vec2::Zero(), s, std::nullopt), exact, 1e-6 * exact);
  }
}

TEST(Density, ShrinkingCircleLimit) {
  const auto& h = mcf_run();
  const double T = h.singular_time;
  const auto d = gaussian_density(h, {Vec2::Zero(), T, geometric_times(T, 0.05), std::nullopt});
  ASSERT_EQ(d.values.size(), 3u);
  // self-similar: the value is the same at every scale
  for (double v : d.values) EXPECT_NEAR(v, 1.52034690106628, 2e-3);
  EXPECT_NEAR(d.limit, 1.52034690106628, 1e-3);
}

TEST(Density, ReachedPointOnStationaryCircle) {
  const auto& h = circle_run();
  const Vec2 x0 = h.back().curve.vertices[17];
  const auto d = gaussian_density(h, {x0, 1.0, {0.97, 0.98, 0.99}, std::nullopt});
  EXPECT_GE(d.limit, 0.99);
  EXPECT_LT(d.limit, 1.01);
  EXPECT_LT(gaussian_density(h, {Vec2(25.0, 0.0), 1.0, {0.97, 0.98, 0.99}, std::nullopt}).limit, 1e-8);
}

TEST(Density, QueryErrors) {
  const auto& h = circle_run();
  EXPECT_EQ(kind_of([&] { gaussian_density(h, {Vec2::Zero(), 0.5, {0.6}, std::nullopt}); }), ErrorKind::QueryOutOfRange);
  EXPECT_EQ(kind_of([&] { gaussian_density(h, {Vec2::Zero(), 3.0, {2.0}, std::nullopt}); }), ErrorKind::QueryOutOfRange);
  EXPECT_EQ(kind_of([&] { local_density(h, {Vec2::Zero(), 1.0, {0.5}, std::nullopt}); }), ErrorKind::BadParameters);
}

TEST(Density, GeometricTimesAndExtrapolation) {
  const auto t = geometric_times(1.0, 0.1);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_DOUBLE_EQ(t[0], 0.6);
  EXPECT_DOUBLE_EQ(t[1], 0.8);
  EXPECT_DOUBLE_EQ(t[2], 0.9);
  // exact on quadratics
  EXPECT_NEAR(detail::extrapolate_to_zero({0.4, 0.2, 0.1}, {3.0 + 0.4 - 0.16, 3.0 + 0.2 - 0.04, 3.0 + 0.1 - 0.01}), 3.0, 1e-14);
}

TEST(LocalDensity, PairsPassOnFlows) {
  for (const auto* h : {&circle_run(), &ellipse_run()}) {
    const Vec2 x0 = h->back().curve.vertices[0];
    const double t0 = h->back().curve.time;
    const auto r = local_density(*h, {x0, t0, {0.0, 0.1, 0.2, 0.3, 0.4}, 0.5});
    EXPECT_EQ(r.pairs_checked, 10u);
    EXPECT_EQ(r.violations, 0u) << r.worst_margin;
  }
}

TEST(LocalDensity, HugeCutoffMatchesGaussian) {
  const auto& h = circle_run();
  const Vec2 x0 = h.back().curve.vertices[0];
  const auto g = gaussian_density(h, {x0, 1.0, {0.5, 0.9}, std::nullopt});
  const auto l = local_density(h, {x0, 1.0, {0.5, 0.9}, 1e6});
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(l.values[k], g.values[k], 1e-12);
}

TEST(ClearingOut, Theta) {
  EXPECT_NEAR(theta(1, 0.1), 0.286975550279574, 1e-12);
  EXPECT_NEAR(theta(1, 0.1), 0.2870, 1e-4);
}

TEST(ClearingOut, LengthInDiskOfSquare) {
  ClosedCurve sq;
  for (int i = 0; i < 16; ++i) sq.vertices.emplace_back(i / 4.0, 0.0);
  for (int i = 0; i < 16; ++i) sq.vertices.emplace_back(4.0, i / 4.0);
  for (int i = 0; i < 16; ++i) sq.vertices.emplace_back(4.0 - i / 4.0, 4.0);
  for (int i = 0; i < 16; ++i) sq.vertices.emplace_back(0.0, 4.0 - i / 4.0);
  EXPECT_NEAR(length_in_disk(sq, Vec2(2.0, 0.0), 0.3), 0.6, 1e-14);
  EXPECT_NEAR(length_in_disk(sq, Vec2(0.0, 0.0), 0.3), 0.6, 1e-14);
  EXPECT_NEAR(length_in_disk(sq, Vec2(2.0, 0.1), 0.5), 2.0 * std::sqrt(0.24), 1e-14);
  EXPECT_NEAR(length_in_disk(sq, Vec2(2.0, 2.0), 0.5), 0.0, 1e-14);
}

TEST(ClearingOut, StationaryCircle) {
  const auto& h = circle_run();
  const auto rep = clearing_out_certificate(h, h.back().curve.vertices[0], 1.0, 0.3, 0.01);
  EXPECT_TRUE(rep.cert.pass) << rep.cert.line();
  EXPECT_EQ(rep.radii.size(), 4u);
  EXPECT_GE(rep.density_limit, 0.99);
  for (double r : rep.ratios) EXPECT_NEAR(r, 2.0, 0.05);
}

TEST(ClearingOut, Errors) {
  const auto& h = circle_run();
  const Vec2 x0 = h.back().curve.vertices[0];
  EXPECT_EQ(kind_of([&] { clearing_out_certificate(h, x0, 1.0, 0.3, 0.5); }), ErrorKind::BetaTooLarge);
  EXPECT_EQ(kind_of([&] { clearing_out_certificate(h, Vec2(5.0, 5.0), 1.0, 0.3, 0.01); }), ErrorKind::PointNotReached);
  EXPECT_EQ(kind_of([&] { clearing_out_certificate(h, x0, 1.0, 2.0, 0.01); }), ErrorKind::QueryOutOfRange);
}

TEST(UniformDiameter, StationaryCircle) {
  const auto s = series(circle_run());
  const auto ok = uniform_diameter_condition(s, 1.0, 2.0);
  EXPECT_TRUE(ok.holds());
  EXPECT_NEAR(ok.worst_window, 1.0, 1e-6);
  EXPECT_FALSE(uniform_diameter_condition(s, 1.0, 0.5).condition);
}

TEST(Asymptotics, CircleTendsToOne) {
  EXPECT_EQ(asymptotic_ratio_scan(series(circle_run()), 0.05).kind, Asymptote::ToOne);
  DiagnosticsSeries s;
  s.rows.resize(1);
  EXPECT_EQ(kind_of([&] { asymptotic_ratio_scan(s, 0.05); }), ErrorKind::Inconclusive);
}

TEST(Density, ResolvedTimes) {
  const auto& h = circle_run();
  const auto t = resolved_times(h, 0.5);
  ASSERT_EQ(t.size(), 3u);
  const double he = h.front().cache.mean_edge();
  for (double v : t) EXPECT_GT(0.5 - v, 4.0 * he * he);
  EXPECT_LT(t.back(), 0.5 - std::max(4.0 * he * he, 100.0 * h.config.dt) + 2e-3);
  EXPECT_EQ(kind_of([&] { resolved_times(h, 0.0); }), ErrorKind::QueryOutOfRange);
}
