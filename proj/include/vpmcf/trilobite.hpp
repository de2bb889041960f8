#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vpmcf/curve.hpp"
#include "vpmcf/error.hpp"

namespace vpmcf {

// Profile curves live in the (x, y) half-plane x >= 0 and are rotated about the y-axis.
// Tangent (x', y'), normal (y', -x'), curvature = turning rate of the tangent.
struct ProfileSegment {
  enum class Kind { arc, line };
  Kind kind = Kind::line;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double theta1 = 0.0, theta2 = 0.0;  // theta1 < theta2, counterclockwise unless reversed
  Vec2 start = Vec2::Zero(), end = Vec2::Zero();
  bool reversed = false;  // traverse the arc clockwise: flips tangent and curvature

  static ProfileSegment arc(Vec2 c, double rho, double th1, double th2, bool rev = false) {
    if (!(rho > 0.0) || !(th2 > th1)) throw Error(ErrorKind::BadParameters, "arc needs radius > 0 and theta1 < theta2");
    ProfileSegment s;
    s.kind = Kind::arc;
    s.center = c;
    s.radius = rho;
    s.theta1 = th1;
    s.theta2 = th2;
    s.reversed = rev;
    return s;
  }
  static ProfileSegment line(Vec2 a, Vec2 b) {
    if (!((b - a).norm() > 0.0)) throw Error(ErrorKind::BadParameters, "line segment has zero length");
    ProfileSegment s;
    s.kind = Kind::line;
    s.start = a;
    s.end = b;
    return s;
  }

  double length() const { return kind == Kind::arc ? radius * (theta2 - theta1) : (end - start).norm(); }

  struct Local {
    Vec2 x, tangent;
    double kappa;
  };
  /// u in [0,1] along the direction of traversal
  Local at(double u) const {
    if (kind == Kind::line) {
      const Vec2 d = end - start;
      return {start + u * d, d.normalized(), 0.0};
    }
    const double th = reversed ? theta2 - u * (theta2 - theta1) : theta1 + u * (theta2 - theta1);
    const Vec2 p = center + radius * Vec2(std::cos(th), std::sin(th));
    Vec2 t(-std::sin(th), std::cos(th));
    double k = 1.0 / radius;
    if (reversed) {
      t = -t;
      k = -k;
    }
    return {p, t, k};
  }

  ProfileSegment translated(const Vec2& d) const {
    ProfileSegment s = *this;
    s.center += d;
    s.start += d;
    s.end += d;
    return s;
  }
};

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool contains(double v, double slack = 0.0) const { return v >= lo - slack && v <= hi + slack; }
  bool exact() const { return lo == hi; }
};

enum class IntegralSource { closed_form, quadrature, paper_table };

struct PieceIntegrals {
  double intH = 0.0;
  Interval intHK;
  double area = 0.0;
  IntegralSource source = IntegralSource::quadrature;
};

namespace detail {

inline void check_axis(const ProfileSegment& seg) {
  constexpr double axis_tol = 1e-9;
  const int samples = 2048;
  for (int k = 0; k <= samples; ++k) {
    const double u = static_cast<double>(k) / samples;
    const auto p = seg.at(u);
    if (p.x.x() < -axis_tol) throw Error(ErrorKind::AxisSingularity, "profile crosses to x < 0");
    if (p.x.x() > axis_tol) continue;
    // on the axis the integrand kappa y'^2 / x stays bounded only if kappa y'^2 vanishes there
    const bool endpoint = k == 0 || k == samples;
    if (!endpoint || (p.kappa != 0.0 && std::abs(p.tangent.y()) > 1e-6)) {
      throw Error(ErrorKind::AxisSingularity, "non-integrable curvature term where the profile meets the axis");
    }
  }
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature of
///   int H dmu = 2 pi int (y' + x kappa) ds,  int HK dmu = 2 pi int (y' kappa^2 + kappa y'^2 / x) ds,  area = 2 pi int x ds.
inline PieceIntegrals quadrature_integrals(const ProfileSegment& seg) {
  using boost::math::quadrature::gauss_kronrod;
  detail::check_axis(seg);
  const double len = seg.length();
  const double two_pi = 2.0 * std::numbers::pi;
  auto integrate = [&](auto&& f) { return gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14) * len * two_pi; };
  PieceIntegrals p;
  p.intH = integrate([&](double u) {
    const auto q = seg.at(u);
    return q.tangent.y() + q.x.x() * q.kappa;
  });
  const double hk = integrate([&](double u) {
    const auto q = seg.at(u);
    if (q.kappa == 0.0) return 0.0;
    const double yd = q.tangent.y();
    return yd * q.kappa * q.kappa + q.kappa * yd * yd / q.x.x();
  });
  p.intHK = {hk, hk};
  p.area = integrate([&](double u) { return seg.at(u).x.x(); });
  p.source = IntegralSource::quadrature;
  return p;
}

/// Closed forms: vertical lines (cylinders), arcs centred on the axis (exact), and arcs with
/// centre distance above the radius (int HK bracketed by the denominators x~ +- rho).
inline PieceIntegrals closed_form_integrals(const ProfileSegment& seg) {
  const double pi = std::numbers::pi;
  PieceIntegrals p;
  p.source = IntegralSource::closed_form;
  if (seg.kind == ProfileSegment::Kind::line) {
    const Vec2 d = seg.end - seg.start;
    if (d.x() != 0.0) throw Error(ErrorKind::UnsupportedSegment, "only axis-parallel lines have a closed form");
    p.intH = 2.0 * pi * d.y();
    p.intHK = {0.0, 0.0};
    p.area = 2.0 * pi * seg.start.x() * std::abs(d.y());
    return p;
  }
  const double rho = seg.radius, xt = seg.center.x();
  const double t1 = seg.theta1, t2 = seg.theta2;
  const double dsin = std::sin(t2) - std::sin(t1);
  const double sign = seg.reversed ? -1.0 : 1.0;
  p.intH = sign * (4.0 * pi * rho * dsin + 2.0 * pi * xt * (t2 - t1));
  p.area = 2.0 * pi * rho * (rho * dsin + xt * (t2 - t1));
  const double sin_part = 2.0 * pi / rho * dsin;
  const double cos2 = 0.5 * (std::sin(2.0 * t2) - std::sin(2.0 * t1)) + (t2 - t1);  // 2 int cos^2
  if (xt == 0.0) {
    const double v = sign * (sin_part + 2.0 * pi / rho * dsin);
    p.intHK = {v, v};
  } else if (xt > rho) {
    const double a = sin_part + pi * cos2 / (xt + rho);
    const double b = sin_part + pi * cos2 / (xt - rho);
    p.intHK = sign > 0 ? Interval{a, b} : Interval{-b, -a};
  } else {
    throw Error(ErrorKind::UnsupportedSegment, "arc with 0 < centre distance <= radius has no closed-form bound");
  }
  return p;
}

struct ProfileGroup {
  std::string name;
  std::vector<ProfileSegment> segments;
  int multiplicity = 1;
  double area_offset = 0.0;  // area removed per copy (e.g. holes cut into the disk)
  std::vector<std::string> labels;
};

struct PieceRow {
  std::string piece;
  double intH_oracle = 0.0;
  double intH_table = NAN;
  double intHK_oracle = 0.0;
  double intHK_table = NAN;  // value, or the lower bound when the table gives one
};

struct TrilobiteSurface {
  double rho = 1.0;
  int n = 7;
  double r = 0.01;
  double l = 0.0;
  std::vector<ProfileGroup> groups;

  struct Totals {
    double intH = 0.0, intHK = 0.0, area = 0.0;
  };
  Totals totals() const {
    Totals t;
    for (const auto& g : groups) {
      for (const auto& s : g.segments) {
        const auto q = quadrature_integrals(s);
        t.intH += g.multiplicity * q.intH;
        t.intHK += g.multiplicity * q.intHK.lo;
        t.area += g.multiplicity * q.area;
      }
      t.area -= g.multiplicity * g.area_offset;
    }
    return t;
  }
  TrilobiteSurface translated_y(double dy) const {
    TrilobiteSurface s = *this;
    for (auto& g : s.groups)
      for (auto& seg : g.segments) seg = seg.translated(Vec2(0.0, dy));
    return s;
  }
};

/// Cylinder length from the table's bookkeeping of int H.
inline double paper_l(double rho, int n, double r) {
  const double pi = std::numbers::pi;
  const double denom = n - 3.0 - 1.0 / (2.0 * pi);
  if (!(denom > 0.0)) throw Error(ErrorKind::ParameterDomain, "need n - 3 - 1/(2 pi) > 0");
  return ((11.0 * pi / 3.0 + 1.0 / pi - 4.0) * n * rho + (2.0 - std::sqrt(3.0) - 1.0 / (2.0 * pi)) * r) / denom;
}

/// Capped cylinder in its own frame: quarter circle off the plane, cylinder, inward-facing hemisphere.
inline ProfileGroup capped_cylinder(double rho, double l, int copies) {
  const double pi = std::numbers::pi;
  ProfileGroup g;
  g.name = "capped_cylinder";
  g.multiplicity = copies;
  g.area_offset = pi * 4.0 * rho * rho;
  g.segments = {ProfileSegment::arc({2.0 * rho, -rho}, rho, pi / 2.0, pi),
                ProfileSegment::line({rho, -rho}, {rho, -rho - l}),
                ProfileSegment::arc({0.0, -rho - l}, rho, -pi / 2.0, 0.0, true)};
  g.labels = {"join_arc", "cylinder", "hemisphere"};
  return g;
}

inline TrilobiteSurface assemble_trilobite(double rho, int n, double r, std::optional<double> l_override = std::nullopt) {
  if (!(rho > 0.0) || !(r > 0.0)) throw Error(ErrorKind::BadParameters, "rho and r must be positive");
  const double pi = std::numbers::pi, s3 = std::sqrt(3.0);
  TrilobiteSurface s;
  s.rho = rho;
  s.n = n;
  s.r = r;
  s.l = l_override ? *l_override : paper_l(rho, n, r);
  if (n - 3.0 - 1.0 / (2.0 * pi) <= 0.0) throw Error(ErrorKind::ParameterDomain, "need n - 3 - 1/(2 pi) > 0");
  if (!(s.l > 0.0)) throw Error(ErrorKind::ParameterDomain, "cylinder length must be positive");
  const double l = s.l, R = 2.0 * n * rho;

  s.groups.push_back(capped_cylinder(rho, l, n));

  ProfileGroup outer;
  outer.name = "outer";
  const double yc = 2.0 * r - 3.0 * l - 2.0 * s3 * n * rho;
  const Vec2 cone_lo(0.5 * s3 * r, yc - 0.5 * r), cone_hi(R + 0.5 * s3 * l, -1.5 * l);
  outer.segments = {ProfileSegment::arc({0.0, yc}, r, -pi / 2.0, -pi / 6.0),
                    ProfileSegment::line(cone_lo, cone_hi),
                    ProfileSegment::arc({R, -l}, l, -pi / 6.0, pi / 2.0),
                    ProfileSegment::line({R, 0.0}, {0.0, 0.0})};
  outer.labels = {"cap", "cone", "joining_arc", "disk"};
  s.groups.push_back(outer);
  return s;
}

/// Secant solve on l for total int H = 0, started from the table's l(r).
inline TrilobiteSurface balance_trilobite(double rho, int n, double r) {
  const double l0 = paper_l(rho, n, r);
  auto f = [&](double l) { return assemble_trilobite(rho, n, r, l).totals().intH; };
  double x0 = l0, x1 = l0 * 1.01, f0 = f(x0), f1 = f(x1);
  for (int it = 0; it < 20 && f1 != f0; ++it) {
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    if (!(x1 > 0.0)) throw Error(ErrorKind::ParameterDomain, "no positive cylinder length balances int H");
    f1 = f(x1);
    if (std::abs(f1) < 1e-13 * (1.0 + std::abs(f0))) break;
  }
  return assemble_trilobite(rho, n, r, x1);
}

/// -2 (int HK) / area, valid only when int H vanishes
inline double hbar_derivative_at_zero(const TrilobiteSurface& s) {
  const auto t = s.totals();
  if (std::abs(t.intH) > 1e-6 * t.area) {
    throw Error(ErrorKind::NotBalanced, "int H = " + std::to_string(t.intH) + " is not zero relative to area " + std::to_string(t.area));
  }
  return -2.0 * t.intHK / t.area;
}

/// Oracle values next to the table of the construction, one row per piece plus totals.
inline std::vector<PieceRow> trilobite_rows(const TrilobiteSurface& s) {
  const double pi = std::numbers::pi, s3 = std::sqrt(3.0);
  const double rho = s.rho, l = s.l, r = s.r;
  const int n = s.n;
  std::vector<PieceRow> rows;
  const auto& q = s.groups.at(0);
  const double qH[3] = {2.0 * pi * rho * (pi - 2.0), -2.0 * pi * l, -4.0 * pi * rho};
  const double qHK[3] = {pi * pi / (6.0 * rho) - 2.0 * pi / rho, 0.0, -4.0 * pi / rho};
  double groupH = 0.0, groupHK = 0.0;
  for (std::size_t i = 0; i < q.segments.size(); ++i) {
    const auto v = quadrature_integrals(q.segments[i]);
    rows.push_back({q.labels[i], v.intH, qH[i], v.intHK.lo, qHK[i]});
    groupH += v.intH;
    groupHK += v.intHK.lo;
  }
  rows.push_back({"capped_cylinder_x" + std::to_string(n), n * groupH, 2.0 * n * pi * (-(4.0 - pi) * rho - l), n * groupHK,
                  -6.0 * n * pi / rho});
  const auto& o = s.groups.at(1);
  const double oH[4] = {2.0 * pi * (2.0 - s3) * r, 2.0 * n * rho + l - r, 6.0 * pi * l + 8.0 / 3.0 * n * pi * pi * rho, 0.0};
  const double oHK[4] = {2.0 * pi * (2.0 - s3) / r, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < o.segments.size(); ++i) {
    const auto v = quadrature_integrals(o.segments[i]);
    rows.push_back({o.labels[i], v.intH, oH[i], v.intHK.lo, oHK[i]});
  }
  const auto t = s.totals();
  const double tableH = 2.0 * pi * ((3.0 + 1.0 / (2.0 * pi) - n) * l + (11.0 / 3.0 * pi + 1.0 / pi - 4.0) * n * rho +
                                    (2.0 - s3 - 1.0 / (2.0 * pi)) * r);
  rows.push_back({"total", t.intH, tableH, t.intHK, 2.0 * pi * (2.0 - s3) / r - 6.0 * n * pi / rho});
  return rows;
}

inline void write_trilobite_report(std::ostream& os, const TrilobiteSurface& s) {
  os << "piece,intH_oracle,intH_table,intHK_oracle,intHK_table_or_bound\n";
  char buf[256];
  for (const auto& r : trilobite_rows(s)) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g\n", r.piece.c_str(), r.intH_oracle, r.intH_table, r.intHK_oracle, r.intHK_table);
    os << buf;
  }
  const auto t = s.totals();
  std::snprintf(buf, sizeof buf, "area,%.12g,,,\nl,%.12g,,,\n", t.area, s.l);
  os << buf;
  if (std::abs(t.intH) <= 1e-6 * t.area) {
    std::snprintf(buf, sizeof buf, "hbar_derivative_at_zero,%.12g,,,\n", -2.0 * t.intHK / t.area);
    os << buf;
  }
}

}  // namespace vpmcf
