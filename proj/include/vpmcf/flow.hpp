#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vpmcf/curve.hpp"
#include "vpmcf/cyclic_tridiagonal.hpp"
#include "vpmcf/error.hpp"

namespace vpmcf {

enum class FlowMode { vpmcf, mcf };
enum class Multiplier { analytic, constrained };

struct FlowConfig {
  FlowMode mode = FlowMode::vpmcf;
  Multiplier multiplier = Multiplier::constrained;
  double dt = 1e-5;
  double t_end = 1.0;
  std::size_t N = 512;
  std::size_t resample_every = 100;
  double cfl_guard = 1e-3;
  std::size_t record_every = 1;  // accepted steps between stored snapshots
};

inline void validate(const FlowConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw Error(ErrorKind::BadParameters, "dt and t_end must be positive");
  if (!(cfg.cfl_guard > 0.0 && cfg.cfl_guard <= 1.0)) throw Error(ErrorKind::BadParameters, "cfl_guard must lie in (0,1]");
  if (cfg.resample_every == 0 || cfg.record_every == 0) throw Error(ErrorKind::BadParameters, "step counts must be positive");
  check_vertex_count(cfg.N);
}

struct StepResult {
  ClosedCurve curve;
  double multiplier = 0.0;
};

namespace detail {

struct AffineUpdate {
  std::vector<Vec2> base;   // M^{-1} X
  std::vector<Vec2> force;  // M^{-1} (dt nu)
};

// (I - dt L_h) X^{n+1} = X^n + dt lambda nu^n with the arclength Laplacian frozen at step n;
// linear in lambda, so both pieces are solved once.
inline AffineUpdate implicit_solve(const ClosedCurve& c, const GeoCache& g, double dt) {
  const std::size_t n = c.size();
  std::vector<double> lo(n), di(n), up(n);
  std::vector<Vec2> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hm = g.edge_lengths[(i + n - 1) % n], hp = g.edge_lengths[i];
    const double s = 2.0 * dt / (hm + hp);
    lo[i] = -s / hm;
    up[i] = -s / hp;
    di[i] = 1.0 + s / hm + s / hp;
    f[i] = dt * g.normals[i];
  }
  CyclicTridiagonal m(std::move(lo), std::move(di), std::move(up));
  return {m.solve(c.vertices), m.solve(std::move(f))};
}

// signed area of base + lambda * force is quadratic in lambda
struct AreaPolynomial {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  double operator()(double lam) const { return a0 + lam * (a1 + lam * a2); }
};

inline AreaPolynomial area_polynomial(const AffineUpdate& u) {
  const std::size_t n = u.base.size();
  AreaPolynomial p;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    p.a0 += cross(u.base[i], u.base[j]);
    p.a1 += cross(u.base[i], u.force[j]) + cross(u.force[i], u.base[j]);
    p.a2 += cross(u.force[i], u.force[j]);
  }
  p.a0 *= 0.5;
  p.a1 *= 0.5;
  p.a2 *= 0.5;
  return p;
}

inline double secant_multiplier(const AreaPolynomial& area, double target, double guess) {
  const double tol = 1e-14 * std::abs(target);
  double x0 = guess, x1 = guess * (1.0 + 1e-3) + 1e-6;
  double f0 = area(x0) - target, f1 = area(x1) - target;
  for (int it = 0; it < 50; ++it) {
    if (std::abs(f1) <= tol) return x1;
    if (f1 == f0) break;
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = area(x1) - target;
    if (!std::isfinite(x1)) break;
  }
  if (std::abs(f1) <= 1e-12 * std::abs(target)) return x1;
  throw Error(ErrorKind::StepRejected, "area constraint did not converge");
}

inline StepResult step_with_cache(const ClosedCurve& c, const GeoCache& g, const FlowConfig& cfg,
                                  std::optional<double> target_area) {
  const double dt = cfg.dt;
  const double hmin = g.min_edge();
  if (cfg.cfl_guard * dt > hmin * hmin) {
    throw Error(ErrorKind::StepRejected, "time step exceeds the edge-length guard");
  }
  const AffineUpdate u = implicit_solve(c, g, dt);

  double lam = 0.0;
  if (cfg.mode == FlowMode::vpmcf) {
    if (cfg.multiplier == Multiplier::analytic) {
      lam = g.kappa_bar;
    } else {
      lam = secant_multiplier(area_polynomial(u), target_area.value_or(g.area), g.kappa_bar);
    }
  }

  StepResult r;
  r.multiplier = lam;
  r.curve.time = c.time + dt;
  r.curve.vertices.resize(c.size());
  double total = 0.0, shortest = INFINITY;
  for (std::size_t i = 0; i < c.size(); ++i) r.curve.vertices[i] = u.base[i] + lam * u.force[i];
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double h = (r.curve.vertices[(i + 1) % c.size()] - r.curve.vertices[i]).norm();
    if (!std::isfinite(h)) throw Error(ErrorKind::StepRejected, "non-finite vertex after step");
    total += h;
    shortest = std::min(shortest, h);
  }
  if (shortest < 1e-3 * total / static_cast<double>(c.size())) {
    throw Error(ErrorKind::StepRejected, "edge collapsed below 1e-3 of the mean edge");
  }
  return r;
}

}  // namespace detail

/// One semi-implicit step. In constrained mode the enclosed area is driven to
/// target_area (default: the area of the input curve).
inline StepResult step(const ClosedCurve& c, const FlowConfig& cfg, std::optional<double> target_area = std::nullopt) {
  validate(cfg);
  return detail::step_with_cache(c, build_cache(c, false), cfg, target_area);
}

struct Snapshot {
  ClosedCurve curve;
  GeoCache cache;
  double hbar = 0.0;  // the nonlocal term of the flow: kappa_bar, or 0 in mcf mode
  double i2 = 0.0;    // integral of hbar^2 up to curve.time
  std::size_t epoch = 0;  // bumped on every resample
  std::size_t step = 0;
};

struct StepRecord {
  double t = 0.0;  // time at the start of the step
  double dt = 0.0;
  double multiplier = 0.0;
  double hbar = 0.0;
  double length_before = 0.0;
  double length_after = 0.0;
  double area_after = 0.0;
};

enum class RunStatus { Completed, SingularityReached };

struct FlowHistory {
  FlowConfig config;
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> steps;
  RunStatus status = RunStatus::Completed;
  double singular_time = NAN;
  double initial_area = 0.0;

  bool empty() const { return snapshots.empty(); }
  const Snapshot& front() const { return snapshots.front(); }
  const Snapshot& back() const { return snapshots.back(); }
};

using SnapshotObserver = std::function<void(const Snapshot&)>;

inline Snapshot make_snapshot(const ClosedCurve& c, FlowMode mode, double i2, std::size_t epoch, std::size_t step) {
  Snapshot s;
  s.curve = c;
  s.cache = build_cache(c);
  s.hbar = mode == FlowMode::mcf ? 0.0 : s.cache.kappa_bar;
  s.i2 = i2;
  s.epoch = epoch;
  s.step = step;
  return s;
}

inline FlowHistory run(const ClosedCurve& initial, const FlowConfig& cfg, const SnapshotObserver& observer = {}) {
  validate(cfg);
  FlowHistory hist;
  hist.config = cfg;

  ClosedCurve cur = initial.size() == cfg.N ? initial : resample_uniform(initial, cfg.N);
  GeoCache cache = build_cache(cur, false);
  const double area0 = cache.area;
  const double mean_edge0 = cache.mean_edge();
  hist.initial_area = area0;

  auto hbar_of = [&](const GeoCache& g) { return cfg.mode == FlowMode::mcf ? 0.0 : g.kappa_bar; };
  double i2 = 0.0;
  std::size_t steps = 0, epoch = 0, since_resample = 0, streak = 0;
  auto record = [&] {
    hist.snapshots.push_back(make_snapshot(cur, cfg.mode, i2, epoch, steps));
    if (observer) observer(hist.snapshots.back());
  };
  record();

  FlowConfig local = cfg;
  double dt = cfg.dt;
  const double t0 = cur.time;
  const double t_stop = t0 + cfg.t_end;
  // a remainder below 1e-6 dt is accumulated rounding, not a step
  while (t_stop - cur.time > 1e-6 * cfg.dt) {
    if (since_resample >= cfg.resample_every) {
      cur = resample_uniform(cur, cfg.N);
      cache = build_cache(cur, false);
      ++epoch;
      since_resample = 0;
    }
    if (cache.min_edge() < 1e-6 * mean_edge0) {
      hist.status = RunStatus::SingularityReached;
      hist.singular_time = cur.time;
      break;
    }
    local.dt = std::min(dt, t_stop - cur.time);
    StepResult res;
    try {
      res = detail::step_with_cache(cur, cache, local, area0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StepRejected) throw;
      dt *= 0.5;
      streak = 0;
      if (dt < 1e-14) throw Error(ErrorKind::NoProgress, "time step underflow at t = " + std::to_string(cur.time));
      continue;
    }

    GeoCache next = build_cache(res.curve, false);
    const double hb0 = hbar_of(cache), hb1 = hbar_of(next);
    i2 += 0.5 * local.dt * (hb0 * hb0 + hb1 * hb1);
    hist.steps.push_back({cur.time, local.dt, res.multiplier, hb0, cache.length, next.length, next.area});
    cur = std::move(res.curve);
    cache = std::move(next);
    ++steps;
    ++since_resample;
    if (++streak >= 8 && dt < cfg.dt) {
      dt = std::min(2.0 * dt, cfg.dt);
      streak = 0;
    }
    if (steps % cfg.record_every == 0) record();
  }
  if (hist.snapshots.back().step != steps) record();
  return hist;
}

/// max over vertices of |dk/dt - (k_ss + (k - hbar) k^2)| at snapshot k, from snapshots k-1, k, k+1
/// taken on the same mesh (no resample in between).
inline double curvature_evolution_residual(const FlowHistory& h, std::size_t k) {
  if (k < 1 || k + 1 >= h.snapshots.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "snapshot index " + std::to_string(k) + " has no two neighbours");
  }
  const Snapshot &a = h.snapshots[k - 1], &b = h.snapshots[k], &c = h.snapshots[k + 1];
  if (a.epoch != b.epoch || b.epoch != c.epoch || a.curve.size() != c.curve.size()) {
    throw Error(ErrorKind::MeshChanged, "resample between snapshots " + std::to_string(k - 1) + " and " + std::to_string(k + 1));
  }
  const std::size_t n = b.curve.size();
  const double span = c.curve.time - a.curve.time;
  const double lam = h.config.mode == FlowMode::mcf ? 0.0 : b.hbar;
  const auto& g = b.cache;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    const double hm = g.edge_lengths[im], hp = g.edge_lengths[i];
    const double kss = 2.0 * ((g.curvature[ip] - g.curvature[i]) / hp - (g.curvature[i] - g.curvature[im]) / hm) / (hm + hp);
    const double kt = (c.cache.curvature[i] - a.cache.curvature[i]) / span;
    const double k0 = g.curvature[i];
    worst = std::max(worst, std::abs(kt - (kss + (k0 - lam) * k0 * k0)));
  }
  return worst;
}

}  // namespace vpmcf
