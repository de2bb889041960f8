#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "vpmcf/trilobite.hpp"

using namespace vpmcf;
constexpr double kPi = std::numbers::pi;

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

const TrilobiteSurface& balanced() {
  static const TrilobiteSurface s = balance_trilobite(1.0, 7, 0.005);
  return s;
}

}  // namespace

TEST(Pieces, Hemisphere) {
  const auto seg = ProfileSegment::arc({0.0, 0.0}, 1.0, 0.0, kPi / 2.0);
  const auto q = quadrature_integrals(seg), c = closed_form_integrals(seg);
  EXPECT_NEAR(q.intH, 4.0 * kPi, 1e-10);
  EXPECT_NEAR(q.intHK.lo, 4.0 * kPi, 1e-10);
  EXPECT_NEAR(q.area, 2.0 * kPi, 1e-10);
  EXPECT_NEAR(c.intH, 4.0 * kPi, 1e-12);
  EXPECT_TRUE(c.intHK.exact());
  EXPECT_NEAR(c.intHK.lo, 4.0 * kPi, 1e-12);
}

TEST(Pieces, SphereScaling) {
  // int H scales like r, int HK like 1/r
  for (double r : {0.01, 0.5, 3.0}) {
    const auto q = quadrature_integrals(ProfileSegment::arc({0.0, 1.0}, r, -kPi / 2.0, kPi / 2.0));
    EXPECT_NEAR(q.intH, 8.0 * kPi * r, 1e-10 * (1.0 + r));
    EXPECT_NEAR(q.intHK.lo, 8.0 * kPi / r, 1e-10 / r);
  }
}

TEST(Pieces, Cylinder) {
  const auto seg = ProfileSegment::line({1.0, 0.0}, {1.0, 3.0});
  const auto q = quadrature_integrals(seg), c = closed_form_integrals(seg);
  EXPECT_NEAR(q.intH, 6.0 * kPi, 1e-10);
  EXPECT_NEAR(c.intH, 6.0 * kPi, 1e-12);
  EXPECT_EQ(q.intHK.lo, 0.0);
  EXPECT_NEAR(q.area, 6.0 * kPi, 1e-10);
}

TEST(Pieces, OffAxisArc) {
  const auto seg = ProfileSegment::arc({2.0, -1.0}, 1.0, kPi / 2.0, kPi);
  const auto q = quadrature_integrals(seg), c = closed_form_integrals(seg);
  EXPECT_NEAR(q.intH, 2.0 * kPi * (kPi - 2.0), 1e-10);
  EXPECT_NEAR(c.intH, 2.0 * kPi * (kPi - 2.0), 1e-12);
  EXPECT_NEAR(q.intHK.lo, -1.91507937512959, 1e-10);
  EXPECT_TRUE(c.intHK.contains(q.intHK.lo));
  EXPECT_NEAR(c.intHK.lo, -4.638, 1e-3);
  EXPECT_NEAR(c.intHK.hi, -1.348, 1e-3);
}

TEST(Pieces, ReversedArcFlipsSigns) {
  const auto a = ProfileSegment::arc({2.0, -1.0}, 1.0, kPi / 2.0, kPi), b = ProfileSegment::arc({2.0, -1.0}, 1.0, kPi / 2.0, kPi, true);
  const auto qa = quadrature_integrals(a), qb = quadrature_integrals(b);
  EXPECT_NEAR(qb.intH, -qa.intH, 1e-10);
  EXPECT_NEAR(qb.intHK.lo, -qa.intHK.lo, 1e-10);
  EXPECT_NEAR(qb.area, qa.area, 1e-10);
  EXPECT_TRUE(closed_form_integrals(b).intHK.contains(qb.intHK.lo));
}

TEST(Pieces, Cap) {
  const double r = 0.005;
  const auto q = quadrature_integrals(ProfileSegment::arc({0.0, -40.0}, r, -kPi / 2.0, -kPi / 6.0));
  EXPECT_NEAR(q.intH, 2.0 * kPi * r, 1e-12);
  EXPECT_NEAR(q.intHK.lo, 2.0 * kPi / r, 1e-8 / r);
}

TEST(Pieces, TranslationAlongAxis) {
  for (const auto& seg : {ProfileSegment::arc({2.0, -1.0}, 1.0, 0.3, 2.0), ProfileSegment::line({0.5, 0.0}, {3.0, 2.0})}) {
    const auto a = quadrature_integrals(seg), b = quadrature_integrals(seg.translated(Vec2(0.0, 17.0)));
    EXPECT_NEAR(a.intH, b.intH, 1e-10);
    EXPECT_NEAR(a.intHK.lo, b.intHK.lo, 1e-10);
    EXPECT_NEAR(a.area, b.area, 1e-9);
  }
}

TEST(Pieces, Errors) {
  EXPECT_EQ(kind_of([] { quadrature_integrals(ProfileSegment::line({1.0, 0.0}, {-1.0, 1.0})); }), ErrorKind::AxisSingularity);
  EXPECT_EQ(kind_of([] { quadrature_integrals(ProfileSegment::arc({0.5, 0.0}, 1.0, 0.0, kPi)); }), ErrorKind::AxisSingularity);
  EXPECT_EQ(kind_of([] { closed_form_integrals(ProfileSegment::line({1.0, 0.0}, {2.0, 1.0})); }), ErrorKind::UnsupportedSegment);
  EXPECT_EQ(kind_of([] { closed_form_integrals(ProfileSegment::arc({0.5, 0.0}, 1.0, 0.0, 1.0)); }), ErrorKind::UnsupportedSegment);
  EXPECT_EQ(kind_of([] { ProfileSegment::arc({0.0, 0.0}, -1.0, 0.0, 1.0); }), ErrorKind::BadParameters);
}

TEST(Length, TableFormula) {
  EXPECT_NEAR(paper_l(1.0, 7, 0.01), 14.2842181277896, 1e-10);
  EXPECT_EQ(kind_of([] { paper_l(1.0, 3, 0.01); }), ErrorKind::ParameterDomain);
}

TEST(Assembly, BalancedSurface) {
  const auto& s = balanced();
  const auto t = s.totals();
  EXPECT_LE(std::abs(t.intH), 1e-10 * t.area);
  EXPECT_NEAR(s.l, 19.0235565, 1e-6);
  EXPECT_GT(t.intHK, 0.0);
  EXPECT_NEAR(t.intHK, 1156.02, 0.01);
  EXPECT_NEAR(t.area, 14253.5, 0.1);
  const double d = hbar_derivative_at_zero(s);
  EXPECT_LT(d, 0.0);
  EXPECT_NEAR(d, -2.0 * t.intHK / t.area, 1e-14);
}

TEST(Assembly, UnbalancedRaises) {
  const auto s = assemble_trilobite(1.0, 7, 0.005);
  EXPECT_EQ(kind_of([&] { hbar_derivative_at_zero(s); }), ErrorKind::NotBalanced);
}

TEST(Assembly, TranslationInvariant) {
  const auto& s = balanced();
  EXPECT_NEAR(hbar_derivative_at_zero(s.translated_y(-5.0)), hbar_derivative_at_zero(s), 1e-12);
}

TEST(Assembly, CapDominatesAsRShrinks) {
  const auto a = balance_trilobite(1.0, 7, 0.005), b = balance_trilobite(1.0, 7, 0.0025);
  const double capA = quadrature_integrals(a.groups[1].segments[0]).intHK.lo;
  const double capB = quadrature_integrals(b.groups[1].segments[0]).intHK.lo;
  EXPECT_NEAR(capB / capA, 2.0, 1e-9);
  // the total carries an r-independent part, so the ratio only approaches 2
  const double ratio = b.totals().intHK / a.totals().intHK;
  EXPECT_GT(ratio, 2.0);
  EXPECT_LT(ratio, 2.1);
  const double small = balance_trilobite(1.0, 7, 5e-5).totals().intHK / balance_trilobite(1.0, 7, 1e-4).totals().intHK;
  EXPECT_NEAR(small, 2.0, 0.02);
}

TEST(Report, CsvLayout) {
  std::ostringstream os;
  write_trilobite_report(os, balanced());
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "piece,intH_oracle,intH_table,intHK_oracle,intHK_table_or_bound");
  EXPECT_NE(text.find("\ncone,"), std::string::npos);
  EXPECT_NE(text.find("\ntotal,"), std::string::npos);
  EXPECT_NE(text.find("\nhbar_derivative_at_zero,"), std::string::npos);
}
