#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vpmcf/curve.hpp"
#include "vpmcf/error.hpp"
#include "vpmcf/flow.hpp"

namespace vpmcf {

struct SeriesRow {
  double t = 0.0;
  double length = 0.0;
  double area = 0.0;
  double kappa_bar = 0.0;  // the flow's nonlocal term (0 for mcf)
  double i2 = 0.0;
  double psi = 1.0;
  double diam = 0.0;
  double iso_ratio = 0.0;
  double max_abs_kappa = 0.0;
  double ddiam_dt = 0.0;
};

struct DiagnosticsSeries {
  std::vector<SeriesRow> rows;
  double dt = 0.0;  // configured step
  std::size_t N = 0;
  FlowMode mode = FlowMode::vpmcf;

  std::size_t size() const { return rows.size(); }
};

/// pass/fail record with the smallest slack over everything checked (negative means violated)
struct Certificate {
  std::string name;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string detail;

  Certificate() = default;
  explicit Certificate(std::string n) : name(std::move(n)) {}

  void update(double margin) {
    worst_margin = std::min(worst_margin, margin);
    if (!(margin >= 0.0)) pass = false;
  }
  std::string line() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", worst_margin);
    return "CERT " + name + (pass ? " PASS " : " FAIL ") + buf;
  }
};

inline DiagnosticsSeries series(const FlowHistory& h) {
  DiagnosticsSeries s;
  s.dt = h.config.dt;
  s.N = h.config.N;
  s.mode = h.config.mode;
  for (const auto& sn : h.snapshots) {
    SeriesRow r;
    r.t = sn.curve.time;
    r.length = sn.cache.length;
    r.area = sn.cache.area;
    r.kappa_bar = sn.hbar;
    r.i2 = sn.i2;
    r.psi = std::exp(-0.5 * sn.i2);
    r.diam = sn.cache.diameter;
    r.iso_ratio = isoperimetric_ratio(sn.cache);
    r.max_abs_kappa = sn.cache.max_abs_curvature();
    s.rows.push_back(r);
  }
  const std::size_t n = s.rows.size();
  for (std::size_t k = 0; n >= 2 && k < n; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == n ? k : k + 1;
    s.rows[k].ddiam_dt = (s.rows[b].diam - s.rows[a].diam) / (s.rows[b].t - s.rows[a].t);
  }
  return s;
}

inline void write_series_csv(std::ostream& os, const DiagnosticsSeries& s) {
  os << "t,length,area,kappa_bar,i2,psi,diam,iso_ratio,max_abs_kappa,ddiam_dt\n";
  char buf[512];
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.length, r.area,
                  r.kappa_bar, r.i2, r.psi, r.diam, r.iso_ratio, r.max_abs_kappa, r.ddiam_dt);
    os << buf;
  }
}

/// interior rows where d(diam)/dt > 2(|kbar| - 2/diam) + 10 (dt + L/N)
inline std::vector<std::size_t> diameter_derivative_check(const DiagnosticsSeries& s) {
  std::vector<std::size_t> bad;
  if (s.size() < 3) return bad;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const auto& r = s.rows[k];
    const double tol = 10.0 * (s.dt + r.length / static_cast<double>(s.N));
    if (r.ddiam_dt > 2.0 * (std::abs(r.kappa_bar) - 2.0 / r.diam) + tol) bad.push_back(k);
  }
  return bad;
}

/// Two certificates: the L2 bound with R(t) the running max of the diameter, and the
/// same bound with R(t) replaced by the explicit exponential diameter envelope.
inline std::vector<Certificate> l2_multiplier_bound_check(const DiagnosticsSeries& s, double V0) {
  if (s.size() == 0) throw Error(ErrorKind::QueryOutOfRange, "empty series");
  const double L0 = s.rows.front().length;
  if (std::abs(V0) < 1e-12 * L0 * L0) throw Error(ErrorKind::ZeroVolume, "initial area is numerically zero");
  const double k = L0 * L0 / (2.0 * V0 * V0);
  const double c1 = L0 / (2.0 * std::abs(V0));
  const double c2 = std::sqrt(L0) / (2.0 * std::abs(V0));
  const double d0 = s.rows.front().diam;

  Certificate running{"l2_multiplier_running_diameter"}, envelope{"l2_multiplier_diameter_envelope"};
  double R = 0.0;
  for (const auto& r : s.rows) {
    const double t = r.t - s.rows.front().t;
    const double i2 = r.i2 - s.rows.front().i2;
    R = std::max(R, r.diam);
    const double bound = k * (R * R + t) * (1.0 + 1e-6);
    running.update((bound - i2) / bound);
    const double D = (d0 + 2.0 * c1 * t) * std::exp(2.0 * c2 * std::sqrt(L0) * std::sqrt(t));
    const double benv = k * (D * D + t) * (1.0 + 1e-6);
    envelope.update(std::min((benv - i2) / benv, (D * (1.0 + 1e-6) - r.diam) / D));
  }
  return {running, envelope};
}

// ---- densities ---------------------------------------------------------------

struct DensityQuery {
  Vec2 x0 = Vec2::Zero();
  double t0 = 0.0;
  std::vector<double> times;  // requested evaluation times, each < t0
  std::optional<double> rho;
};

struct DensityResult {
  std::vector<double> times;  // actual snapshot times used
  std::vector<double> values;
  double limit = NAN;
};

inline double heat_kernel(const Vec2& x, const Vec2& x0, double s) {
  return std::exp(-(x - x0).squaredNorm() / (4.0 * s)) / std::sqrt(4.0 * std::numbers::pi * s);
}

/// trapezoid rule over the polyline of the backward heat kernel times an optional cutoff
inline double kernel_integral(const Snapshot& sn, const Vec2& x0, double t0, std::optional<double> rho) {
  const double s = t0 - sn.curve.time;
  double acc = 0.0;
  for (std::size_t i = 0; i < sn.curve.size(); ++i) {
    const Vec2& x = sn.curve.vertices[i];
    double w = heat_kernel(x, x0, s);
    if (rho) {
      const double u = 1.0 - ((x - x0).squaredNorm() - 2.0 * s) / (*rho * *rho);
      w *= u > 0.0 ? u * u * u : 0.0;
    }
    acc += w * sn.cache.dual_lengths[i];
  }
  return acc;
}

inline std::size_t nearest_snapshot(const FlowHistory& h, double t) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < h.snapshots.size(); ++k) {
    if (std::abs(h.snapshots[k].curve.time - t) < std::abs(h.snapshots[best].curve.time - t)) best = k;
  }
  return best;
}

/// linear interpolation of the accumulated integral of hbar^2
inline double i2_at(const FlowHistory& h, double t) {
  const auto& s = h.snapshots;
  if (t <= s.front().curve.time) return s.front().i2;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (t <= s[k].curve.time) {
      const double a = s[k - 1].curve.time, b = s[k].curve.time;
      return s[k - 1].i2 + (s[k].i2 - s[k - 1].i2) * (t - a) / (b - a);
    }
  }
  return s.back().i2;
}

namespace detail {

inline std::vector<std::size_t> query_snapshots(const FlowHistory& h, const DensityQuery& q) {
  if (h.empty()) throw Error(ErrorKind::QueryOutOfRange, "empty history");
  const double lo = h.front().curve.time, hi = h.back().curve.time;
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  std::vector<std::size_t> idx;
  for (double t : q.times) {
    if (!(t < q.t0) || t < lo - slack || t > hi + slack) {
      throw Error(ErrorKind::QueryOutOfRange, "evaluation time " + std::to_string(t) + " outside history or not before t0");
    }
    const std::size_t k = nearest_snapshot(h, t);
    if (!(h.snapshots[k].curve.time < q.t0)) throw Error(ErrorKind::QueryOutOfRange, "nearest snapshot is not before t0");
    idx.push_back(k);
  }
  return idx;
}

// value at s = 0 of the polynomial through the last (up to three) points
inline double extrapolate_to_zero(std::vector<double> s, std::vector<double> f) {
  const std::size_t m = std::min<std::size_t>(3, s.size());
  s.erase(s.begin(), s.end() - static_cast<long>(m));
  f.erase(f.begin(), f.end() - static_cast<long>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (s[i] == s[j]) return f.back();
  for (std::size_t lvl = 1; lvl < m; ++lvl) {
    for (std::size_t i = 0; i + lvl < m; ++i) {
      f[i] = (s[i + lvl] * f[i] - s[i] * f[i + 1]) / (s[i + lvl] - s[i]);
    }
  }
  return f[0];
}

}  // namespace detail

inline DensityResult gaussian_density(const FlowHistory& h, const DensityQuery& q) {
  DensityResult r;
  std::vector<double> svals;
  for (std::size_t k : detail::query_snapshots(h, q)) {
    const auto& sn = h.snapshots[k];
    r.times.push_back(sn.curve.time);
    r.values.push_back(kernel_integral(sn, q.x0, q.t0, std::nullopt));
    svals.push_back(q.t0 - sn.curve.time);
  }
  if (!r.values.empty()) r.limit = detail::extrapolate_to_zero(svals, r.values);
  return r;
}

/// evaluation times t0 - delta * 2^k, k = count-1 .. 0
inline std::vector<double> geometric_times(double t0, double delta, int count = 3) {
  std::vector<double> t;
  for (int k = count - 1; k >= 0; --k) t.push_back(t0 - delta * std::ldexp(1.0, k));
  return t;
}

/// times of the last `count` snapshots before t0 whose kernel width sqrt(t0 - t) still spans a few
/// edges and that lie at least 100 configured steps before t0
inline std::vector<double> resolved_times(const FlowHistory& h, double t0, std::size_t count = 3) {
  std::vector<double> t;
  for (std::size_t k = h.snapshots.size(); k-- > 0 && t.size() < count;) {
    const auto& sn = h.snapshots[k];
    const double he = sn.cache.mean_edge();
    if (t0 - sn.curve.time > std::max(4.0 * he * he, 100.0 * h.config.dt)) t.insert(t.begin(), sn.curve.time);
  }
  if (t.empty()) throw Error(ErrorKind::QueryOutOfRange, "no resolved snapshot before t0");
  return t;
}

struct LocalDensityResult {
  std::vector<double> times;
  std::vector<double> values;  // integral of cutoff * kernel
  std::vector<double> psi;
  double c0 = 0.0;
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

inline LocalDensityResult local_density(const FlowHistory& h, const DensityQuery& q) {
  if (!q.rho || !(*q.rho > 0.0)) throw Error(ErrorKind::BadParameters, "local density needs rho > 0");
  const double rho = *q.rho;
  LocalDensityResult r;
  const auto idx = detail::query_snapshots(h, q);
  r.c0 = kernel_integral(h.front(), q.x0, q.t0, std::nullopt);
  const double tol = 1e-6 * r.c0;
  for (std::size_t k : idx) {
    const auto& sn = h.snapshots[k];
    r.times.push_back(sn.curve.time);
    r.values.push_back(kernel_integral(sn, q.x0, q.t0, rho));
    r.psi.push_back(std::exp(-0.5 * sn.i2));
  }
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      if (!(r.times[a] < r.times[b])) continue;
      const double gap = r.times[b] - r.times[a];
      const double l2 = std::max(0.0, h.snapshots[idx[b]].i2 - h.snapshots[idx[a]].i2);
      const double rhs = r.psi[a] * r.values[a] + 6.0 * r.c0 * std::sqrt(gap / (rho * rho)) * std::sqrt(l2) + tol;
      const double margin = rhs - r.psi[b] * r.values[b];
      ++r.pairs_checked;
      r.worst_margin = std::min(r.worst_margin, margin);
      if (margin < 0.0) ++r.violations;
    }
  }
  return r;
}

inline double theta(int n, double beta) {
  return 0.5 * std::pow(4.0 * std::numbers::pi * beta, 0.5 * n) * std::pow(1.0 - 2.0 * n * beta, 3);
}

/// length of the polyline inside the closed disk B_rho(x0), with exact clipping per edge
inline double length_in_disk(const ClosedCurve& c, const Vec2& x0, double rho) {
  double total = 0.0;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = c.vertices[i] - x0, d = c.vertices[(i + 1) % n] - c.vertices[i];
    const double a = d.squaredNorm(), b = p.dot(d), cc = p.squaredNorm() - rho * rho;
    const double disc = b * b - a * cc;
    if (disc <= 0.0) continue;
    const double sq = std::sqrt(disc);
    const double u0 = std::max(0.0, (-b - sq) / a), u1 = std::min(1.0, (-b + sq) / a);
    if (u1 > u0) total += (u1 - u0) * std::sqrt(a);
  }
  return total;
}

struct ClearingOutReport {
  Certificate cert{"clearing_out"};
  double density_limit = NAN;
  double c0 = 0.0;
  double l2_window = 0.0;
  double beta0 = 0.0;
  double theta = 0.0;
  std::vector<double> radii, ratios;
};

inline ClearingOutReport clearing_out_certificate(const FlowHistory& h, const Vec2& x0, double t0, double rho0, double beta) {
  if (h.empty()) throw Error(ErrorKind::QueryOutOfRange, "empty history");
  if (!(rho0 > 0.0) || !(beta > 0.0)) throw Error(ErrorKind::BadParameters, "rho0 and beta must be positive");
  const double t_first = h.front().curve.time;
  if (t0 - rho0 * rho0 < t_first - 1e-12) throw Error(ErrorKind::QueryOutOfRange, "window t0 - rho0^2 starts before the history");

  ClearingOutReport rep;
  rep.l2_window = i2_at(h, t0) - i2_at(h, t0 - rho0 * rho0);
  rep.c0 = kernel_integral(h.front(), x0, t0, std::nullopt);
  const double L = rep.l2_window;
  rep.beta0 = std::min(1.0 / (144.0 * rep.c0 * rep.c0 * L * std::exp(L) + 2.0), 1.0 / 3.0);
  if (!(beta < rep.beta0)) {
    throw Error(ErrorKind::BetaTooLarge, "beta = " + std::to_string(beta) + " is not below beta0 = " + std::to_string(rep.beta0));
  }

  DensityQuery q{x0, t0, resolved_times(h, t0), std::nullopt};
  rep.density_limit = gaussian_density(h, q).limit;
  if (!(rep.density_limit >= 0.99)) {
    throw Error(ErrorKind::PointNotReached, "density limit " + std::to_string(rep.density_limit) + " below 0.99");
  }

  rep.theta = theta(1, beta);
  const double need = 0.95 * rep.theta * std::exp(-0.5 * L);
  for (double rho : {rho0 / 8.0, rho0 / 4.0, rho0 / 2.0, rho0 * (1.0 - 1e-3)}) {
    const auto& sn = h.snapshots[nearest_snapshot(h, t0 - beta * rho * rho)];
    const double ratio = length_in_disk(sn.curve, x0, rho) / rho;
    rep.radii.push_back(rho);
    rep.ratios.push_back(ratio);
    rep.cert.update(ratio - need);
  }
  return rep;
}

struct UniformDiameterReport {
  bool condition = false;        // every window integral of hbar^2 of length h stays below C
  bool diameter_bounded = false;
  double worst_window = 0.0;

  bool holds() const { return condition && diameter_bounded; }
};

inline UniformDiameterReport uniform_diameter_condition(const DiagnosticsSeries& s, double h, double C) {
  if (!(h > 0.0)) throw Error(ErrorKind::BadParameters, "window length must be positive");
  UniformDiameterReport rep;
  if (s.size() == 0) return rep;
  auto i2_at_t = [&](double t) {
    const auto& r = s.rows;
    if (t >= r.back().t) return r.back().i2;
    auto it = std::lower_bound(r.begin(), r.end(), t, [](const SeriesRow& a, double v) { return a.t < v; });
    if (it == r.begin()) return it->i2;
    auto prev = it - 1;
    return prev->i2 + (it->i2 - prev->i2) * (t - prev->t) / (it->t - prev->t);
  };
  const double t_last = s.rows.back().t;
  for (const auto& r : s.rows) {
    const double end = std::min(r.t + h, t_last);
    rep.worst_window = std::max(rep.worst_window, i2_at_t(end) - r.i2);
    if (r.t + h >= t_last) break;
  }
  rep.condition = rep.worst_window < C;
  if (!rep.condition) return rep;

  // after the burn-in the running maximum of the diameter must level off
  const double burn = s.rows.front().t + h / 3.0;
  double at_mid = 0.0, overall = 0.0;
  const double t_mid = 0.5 * (burn + t_last);
  for (const auto& r : s.rows) {
    if (r.t < burn) continue;
    overall = std::max(overall, r.diam);
    if (r.t <= t_mid) at_mid = overall;
  }
  rep.diameter_bounded = at_mid == 0.0 || overall <= 1.01 * at_mid;
  return rep;
}

enum class Asymptote { ToOne, ToZero };

struct AsymptoticReport {
  Asymptote kind = Asymptote::ToOne;
  double tail_min = 0.0, tail_max = 0.0;
  Certificate below_iso{"tail_l2_below_iso"};
  Certificate above_iso{"tail_l2_above_iso"};
  bool below_applicable = false, above_applicable = false;
};

/// Classifies the last 10% of the isoperimetric-ratio column and evaluates the tail L2 bounds.
inline AsymptoticReport asymptotic_ratio_scan(const DiagnosticsSeries& s, double eps) {
  if (s.size() < 2) throw Error(ErrorKind::Inconclusive, "series too short");
  const std::size_t n = s.size();
  const std::size_t first = std::min(n - 1, n - std::max<std::size_t>(1, n / 10));
  AsymptoticReport rep;
  rep.tail_min = INFINITY;
  rep.tail_max = -INFINITY;
  double R = 0.0;
  for (std::size_t k = first; k < n; ++k) {
    rep.tail_min = std::min(rep.tail_min, s.rows[k].iso_ratio);
    rep.tail_max = std::max(rep.tail_max, s.rows[k].iso_ratio);
    R = std::max(R, s.rows[k].diam);
  }
  if (rep.tail_min > 1.0 - eps && rep.tail_max < 1.0 + eps) rep.kind = Asymptote::ToOne;
  else if (rep.tail_min > -eps && rep.tail_max < eps) rep.kind = Asymptote::ToZero;
  else throw Error(ErrorKind::Inconclusive, "tail of the isoperimetric ratio stays outside both bands");

  const double V0 = s.rows.front().area;
  const double L1 = s.rows[first].length;
  const double l2 = s.rows.back().i2 - s.rows[first].i2;
  if (std::abs(V0) > 0.0) {
    const double alpha = rep.tail_max;
    if (alpha > 0.0 && alpha < 1.0) {
      rep.below_applicable = true;
      const double f = std::max(alpha * alpha / ((1.0 - alpha) * (1.0 - alpha)), 1.0);
      const double bound = f * R * R / (8.0 * V0 * V0) * L1 * L1;
      rep.below_iso.update((bound - l2) / bound);
    }
    const double beta = rep.tail_min - 1.0;
    if (beta > 0.0) {
      rep.above_applicable = true;
      const double bound = R * R * (1.0 + 1.0 / beta) * (1.0 + 1.0 / beta) / (8.0 * V0 * V0) * L1 * L1;
      rep.above_iso.update((bound - l2) / bound);
    }
  }
  return rep;
}

}  // namespace vpmcf
