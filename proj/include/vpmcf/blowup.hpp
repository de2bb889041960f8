#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vpmcf/curve.hpp"
#include "vpmcf/error.hpp"
#include "vpmcf/flow.hpp"

namespace vpmcf {

/// M -> lambda (M_{T + tau / lambda^2} - p)
struct RescalingFrame {
  Vec2 center = Vec2::Zero();
  double T = 0.0;
  double lambda = 1.0;
};

inline void validate(const RescalingFrame& f) {
  if (!(f.lambda > 0.0) || !std::isfinite(f.lambda)) throw Error(ErrorKind::BadParameters, "rescaling factor must be positive");
}

/// Snapshots with t <= T, mapped to tau = lambda^2 (t - T); caches are recomputed on the new vertices.
inline FlowHistory rescale(const FlowHistory& h, const RescalingFrame& f) {
  validate(f);
  FlowHistory out;
  out.config = h.config;
  out.config.dt = h.config.dt * f.lambda * f.lambda;
  out.status = h.status;
  out.singular_time = 0.0;
  out.initial_area = h.initial_area * f.lambda * f.lambda;
  const double slack = 1e-12 * std::max(1.0, std::abs(f.T));
  for (const auto& sn : h.snapshots) {
    if (sn.curve.time > f.T + slack) continue;
    ClosedCurve c;
    c.time = f.lambda * f.lambda * (sn.curve.time - f.T);
    c.vertices.reserve(sn.curve.size());
    for (const auto& v : sn.curve.vertices) c.vertices.push_back(f.lambda * (v - f.center));
    Snapshot r;
    r.cache = build_cache(c, sn.cache.diameter > 0.0);
    r.curve = std::move(c);
    r.hbar = h.config.mode == FlowMode::mcf ? 0.0 : r.cache.kappa_bar;
    r.i2 = sn.i2;  // the integral of hbar^2 is invariant under parabolic rescaling
    r.epoch = sn.epoch;
    r.step = sn.step;
    out.snapshots.push_back(std::move(r));
  }
  if (out.snapshots.empty()) throw Error(ErrorKind::EmptyWindow, "no snapshot at or before T = " + std::to_string(f.T));
  return out;
}

/// Largest relative deviation between recomputed caches of the rescaled history and the
/// source caches scaled analytically (kappa / lambda, lambda L, lambda^2 V, kbar / lambda).
inline double scaled_cache_mismatch(const FlowHistory& source, const FlowHistory& rescaled, const RescalingFrame& f) {
  auto rel = [](double a, double b, double scale) { return std::abs(a - b) / std::max(scale, std::numeric_limits<double>::min()); };
  double worst = 0.0;
  std::size_t j = 0;
  for (const auto& sn : source.snapshots) {
    if (j >= rescaled.snapshots.size()) break;
    if (sn.step != rescaled.snapshots[j].step) continue;
    const auto& g = rescaled.snapshots[j++].cache;
    const double lam = f.lambda;
    const double kscale = sn.cache.max_abs_curvature() / lam;
    for (std::size_t i = 0; i < g.curvature.size(); ++i) worst = std::max(worst, rel(g.curvature[i], sn.cache.curvature[i] / lam, kscale));
    worst = std::max(worst, rel(g.length, lam * sn.cache.length, lam * sn.cache.length));
    worst = std::max(worst, rel(g.area, lam * lam * sn.cache.area, lam * lam * std::abs(sn.cache.area)));
    worst = std::max(worst, rel(g.kappa_bar, sn.cache.kappa_bar / lam, kscale));
  }
  return worst;
}

namespace detail {

inline double trapezoid_hbar2(const std::vector<Snapshot>& s, std::size_t a, std::size_t b) {
  double acc = 0.0;
  for (std::size_t k = a; k + 1 <= b; ++k) {
    acc += 0.5 * (s[k + 1].curve.time - s[k].curve.time) * (s[k].hbar * s[k].hbar + s[k + 1].hbar * s[k + 1].hbar);
  }
  return acc;
}

}  // namespace detail

struct PsiInvariance {
  double source_integral = 0.0;
  double rescaled_integral = 0.0;
  double discrepancy = 0.0;
  double tolerance = 0.0;  // 1e-6 (1 + I2)
  bool ok() const { return discrepancy <= tolerance; }
};

/// Trapezoid of hbar^2 over the rescaled window in tau against the same sum over the matching source window in t.
inline PsiInvariance psi_invariance_check(const FlowHistory& h, const RescalingFrame& f) {
  const FlowHistory r = rescale(h, f);
  PsiInvariance p;
  const std::size_t last = r.snapshots.size() - 1;
  p.rescaled_integral = detail::trapezoid_hbar2(r.snapshots, 0, last);
  p.source_integral = detail::trapezoid_hbar2(h.snapshots, 0, last);
  p.discrepancy = std::abs(p.rescaled_integral - p.source_integral);
  p.tolerance = 1e-6 * (1.0 + h.snapshots[last].i2);
  return p;
}

struct HamiltonPoint {
  int i = 0;
  std::size_t snapshot = 0;
  std::size_t vertex = 0;
  Vec2 x = Vec2::Zero();
  double t = 0.0;
  double value = 0.0;      // kappa^2 (T - eps_i - t), maximal over the stored grid
  double curvature = 0.0;  // |kappa| at the maximiser, the blowup scale
};

enum class SingularityType { TypeI, TypeII };

struct TypeReport {
  double sup = 0.0;  // sup of max kappa^2 (T - t) over the last half of the time-resolved snapshots before T
  double sup_three_quarters = 0.0;
  SingularityType type = SingularityType::TypeII;
  double constant = NAN;
  std::vector<HamiltonPoint> hamilton;
};

/// Maximiser of kappa^2 (T - offset - t) over all stored (vertex, snapshot) with t < T - offset.
inline HamiltonPoint hamilton_point(const FlowHistory& h, double T, double offset) {
  HamiltonPoint best;
  best.value = -1.0;
  for (std::size_t k = 0; k < h.snapshots.size(); ++k) {
    const auto& sn = h.snapshots[k];
    const double w = T - offset - sn.curve.time;
    if (!(w > 0.0)) continue;
    for (std::size_t v = 0; v < sn.curve.size(); ++v) {
      const double kap = sn.cache.curvature[v];
      const double val = kap * kap * w;
      if (val > best.value) {
        best.value = val;
        best.snapshot = k;
        best.vertex = v;
        best.x = sn.curve.vertices[v];
        best.t = sn.curve.time;
        best.curvature = std::abs(kap);
      }
    }
  }
  return best;
}

inline TypeReport classify_type(const FlowHistory& h, double T, int hamilton_terms = 10) {
  if (h.status != RunStatus::SingularityReached) throw Error(ErrorKind::NoSingularity, "history ended without a singularity");
  // snapshots closer to T than 100 configured steps are not resolved in time and are left out
  const double cutoff = T - 100.0 * h.config.dt;
  std::vector<double> q;
  for (const auto& sn : h.snapshots) {
    if (sn.curve.time > cutoff) break;
    const double k = sn.cache.max_abs_curvature();
    q.push_back(k * k * (T - sn.curve.time));
  }
  if (q.size() < 4) throw Error(ErrorKind::EmptyWindow, "fewer than four snapshots before T");
  TypeReport rep;
  const std::size_t start = q.size() / 2, quarter = q.size() - (q.size() - start) / 2;
  for (std::size_t k = start; k < q.size(); ++k) {
    rep.sup = std::max(rep.sup, q[k]);
    if (k < quarter) rep.sup_three_quarters = rep.sup;
  }
  if (std::isfinite(rep.sup) && rep.sup > 0.0 && (rep.sup - rep.sup_three_quarters) / rep.sup < 0.1) {
    rep.type = SingularityType::TypeI;
    rep.constant = rep.sup;
  }
  for (int i = 1; i <= hamilton_terms; ++i) {
    HamiltonPoint p = hamilton_point(h, T, std::ldexp(T, -i));
    p.i = i;
    rep.hamilton.push_back(p);
  }
  return rep;
}

/// max over vertices of |kappa + <y, nu> / (2 tau)|
inline double shrinker_residual(const ClosedCurve& c, double tau) {
  if (!(tau < 0.0)) throw Error(ErrorKind::NonNegativeTau, "shrinker residual needs tau < 0");
  const GeoCache g = build_cache(c, false);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    worst = std::max(worst, std::abs(g.curvature[i] + c.vertices[i].dot(g.normals[i]) / (2.0 * tau)));
  }
  return worst;
}

struct DecayViolation {
  std::size_t snapshot = 0;
  double tau = 0.0;
  double derivative = 0.0;
  double bound = 0.0;
};

/// Checks |d kbar / d tau| <= 4 / |tau|^3 at interior snapshots of the tau window.
inline std::vector<DecayViolation> hbar_decay_check(const FlowHistory& r, std::optional<double> tau_from = std::nullopt,
                                                    std::optional<double> tau_to = std::nullopt, double tol = 1e-6) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    const double tau = r.snapshots[k].curve.time;
    if (tau >= 0.0) continue;
    if (tau_from && tau < *tau_from) continue;
    if (tau_to && tau > *tau_to) continue;
    idx.push_back(k);
  }
  if (idx.size() < 3) throw Error(ErrorKind::EmptyWindow, "need three snapshots with tau < 0 in the window");
  for (std::size_t k : idx) {
    const auto& sn = r.snapshots[k];
    const double m = sn.cache.max_abs_curvature();
    if (m * m * std::abs(sn.curve.time) > 1.0) {
      throw Error(ErrorKind::NormalizationFailed,
                  "max kappa^2 |tau| = " + std::to_string(m * m * std::abs(sn.curve.time)) + " exceeds 1 at tau = " + std::to_string(sn.curve.time));
    }
  }
  std::vector<DecayViolation> out;
  for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
    const auto &a = r.snapshots[idx[j - 1]], &b = r.snapshots[idx[j]], &c = r.snapshots[idx[j + 1]];
    const double d = (c.hbar - a.hbar) / (c.curve.time - a.curve.time);
    const double tau = b.curve.time;
    const double bound = 4.0 / std::pow(std::abs(tau), 3);
    if (std::abs(d) > bound + tol) out.push_back({idx[j], tau, d, bound});
  }
  return out;
}

}  // namespace vpmcf
