#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vpmcf/blowup.hpp"
#include "vpmcf/curve.hpp"
#include "vpmcf/diagnostics.hpp"
#include "vpmcf/error.hpp"
#include "vpmcf/flow.hpp"
#include "vpmcf/scenario.hpp"
#include "vpmcf/trilobite.hpp"

namespace vpmcf {

struct SuiteReport {
  std::string name;
  std::vector<Certificate> certs;
  std::string log;

  explicit SuiteReport(std::string n) : name(std::move(n)) {}

  bool pass() const {
    for (const auto& c : certs)
      if (!c.pass) return false;
    return true;
  }
  void add(Certificate c) { certs.push_back(std::move(c)); }
  void add(const std::string& name, bool ok, double margin, const std::string& detail = "") {
    Certificate c{name};
    c.update(margin);
    if (!ok) c.pass = false;
    c.detail = detail;
    certs.push_back(std::move(c));
  }
  void note(const std::string& s) { log += s + "\n"; }
  std::string text() const {
    std::ostringstream os;
    os << "suite " << name << "\n" << log;
    for (const auto& c : certs) {
      if (!c.detail.empty()) os << "# " << c.name << ": " << c.detail << "\n";
      os << c.line() << "\n";
    }
    os << (pass() ? "SUITE PASS\n" : "SUITE FAIL\n");
    return os.str();
  }
};

/// Fixed preset runs shared by the suites; each is computed on first use.
class PresetRuns {
 public:
  const FlowHistory& stationary_circle() { return get("stationary_circle", [] {
    return run(make_circle({1.0}, 512), cfg(FlowMode::vpmcf, 1e-5, 1.0, 512, 100));
  }); }
  const FlowHistory& long_circle() { return get("long_circle", [] {
    return run(make_circle({1.0}, 128), cfg(FlowMode::vpmcf, 1e-3, 10.0, 128, 100));
  }); }
  const FlowHistory& ellipse() { return get("ellipse", [] {
    return run(make_ellipse({2.0, 1.0}, 512), cfg(FlowMode::vpmcf, 1e-5, 1.0, 512, 1000));
  }); }
  const FlowHistory& capsule() { return get("capsule", [] {
    return run(make_capsule({0.1}, 512), cfg(FlowMode::vpmcf, 1e-5, 5.0, 512, 1000));
  }); }
  const FlowHistory& capsule_start() { return get("capsule_start", [] {
    return run(make_capsule({0.1}, 2048), cfg(FlowMode::vpmcf, 1e-8, 1e-6, 2048, 1));
  }); }
  const FlowHistory& dumbbell() { return get("dumbbell", [] {
    return run(make_dumbbell({0.2}, 512), cfg(FlowMode::vpmcf, 1e-5, 1.0, 512, 1000));
  }); }
  const FlowHistory& mcf_circle() { return get("mcf_circle", [] {
    return run(make_circle({1.0}, 256), cfg(FlowMode::mcf, 1e-5, 0.6, 256, 1000));
  }); }
  const FlowHistory& mcf_perturbed() { return get("mcf_perturbed", [] {
    return run(make_circle({1.0, 0.05}, 256, 7), cfg(FlowMode::mcf, 1e-5, 0.6, 256, 100));
  }); }
  const FlowHistory& figure_eight() { return get("figure_eight", [] {
    FlowConfig c = cfg(FlowMode::vpmcf, 1e-5, 0.05, 512, 100);
    c.multiplier = Multiplier::analytic;
    return run(make_figure_eight({1e-3}, 512), c);
  }); }

  static FlowConfig cfg(FlowMode mode, double dt, double t_end, std::size_t n, std::size_t record) {
    FlowConfig c;
    c.mode = mode;
    c.dt = dt;
    c.t_end = t_end;
    c.N = n;
    c.record_every = record;
    return c;
  }

 private:
  const FlowHistory& get(const std::string& key, const std::function<FlowHistory()>& make) {
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, std::make_unique<FlowHistory>(make())).first;
    return *it->second;
  }
  std::map<std::string, std::unique_ptr<FlowHistory>> cache_;
};

namespace checks {

inline double area_drift(const FlowHistory& h) {
  double w = 0.0;
  for (const auto& s : h.snapshots) w = std::max(w, std::abs(s.cache.area - h.initial_area) / std::abs(h.initial_area));
  return w;
}

/// smallest slack of L_{k+1} <= L_k + 1e-10 L_0 over accepted steps
inline double length_monotone_margin(const FlowHistory& h) {
  double m = INFINITY;
  const double L0 = h.front().cache.length;
  for (const auto& s : h.steps) m = std::min(m, s.length_before + 1e-10 * L0 - s.length_after);
  return m;
}

inline double diameter_margin(const DiagnosticsSeries& s) {
  double m = INFINITY;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const auto& r = s.rows[k];
    const double tol = 10.0 * (s.dt + r.length / static_cast<double>(s.N));
    m = std::min(m, 2.0 * (std::abs(r.kappa_bar) - 2.0 / r.diam) + tol - r.ddiam_dt);
  }
  return m;
}

inline double psi_monotone_margin(const DiagnosticsSeries& s) {
  double m = INFINITY;
  for (std::size_t k = 0; k < s.size(); ++k) {
    m = std::min(m, s.rows[k].psi);
    if (k > 0) m = std::min(m, s.rows[k - 1].psi - s.rows[k].psi + 1e-15);
  }
  return std::abs(s.rows.front().psi - 1.0) < 1e-15 ? m : -1.0;
}

/// local density pair checks around vertex 0 of the snapshot nearest to 0.6 of the run
inline LocalDensityResult local_pairs(const FlowHistory& h, double rho) {
  const auto& target = h.snapshots[nearest_snapshot(h, h.front().curve.time + 0.6 * (h.back().curve.time - h.front().curve.time))];
  DensityQuery q;
  q.x0 = target.curve.vertices[0];
  q.t0 = target.curve.time;
  q.rho = rho;
  for (double f : {0.0, 0.25, 0.5, 0.75, 0.9, 0.97}) q.times.push_back(h.front().curve.time + f * (q.t0 - h.front().curve.time));
  return local_density(h, q);
}

/// shrinker residuals of the mcf preset rescaled about its extinction point at T - t = 0.5 * 2^-k
inline std::vector<double> shrinker_sequence(const FlowHistory& h, int terms = 5) {
  const double T = h.singular_time;
  Vec2 p = Vec2::Zero();
  for (const auto& v : h.back().curve.vertices) p += v;
  p /= static_cast<double>(h.back().curve.size());
  std::vector<double> out;
  for (int k = 0; k < terms; ++k) {
    const double s = 0.5 * std::ldexp(1.0, -k);
    const auto& sn = h.snapshots[nearest_snapshot(h, T - s)];
    const double lam = 1.0 / std::sqrt(2.0 * (T - sn.curve.time));
    out.push_back(shrinker_residual(transformed(sn.curve, lam, -p), -0.5));
  }
  return out;
}

}  // namespace checks

inline std::vector<std::string> suite_names() {
  return {"conservation", "diameter", "monotonicity", "density", "blowup", "trilobite", "example1"};
}

inline SuiteReport suite_conservation(PresetRuns& p) {
  SuiteReport r{"conservation"};
  for (auto [name, h] : {std::pair{"circle", &p.stationary_circle()}, std::pair{"ellipse", &p.ellipse()}}) {
    const double drift = checks::area_drift(*h);
    r.add(std::string("area_drift_") + name, true, 1e-10 - drift, "max relative drift " + std::to_string(drift));
    r.add(std::string("length_monotone_") + name, true, checks::length_monotone_margin(*h));
    bool same_m = true;
    for (const auto& s : h->snapshots) same_m = same_m && s.cache.turning_number == h->front().cache.turning_number;
    r.add(std::string("turning_number_") + name, same_m, same_m ? 0.0 : -1.0);
  }
  double disp = 0.0;
  const auto& c = p.stationary_circle();
  for (const auto& s : c.snapshots)
    for (std::size_t i = 0; i < s.curve.size(); ++i) disp = std::max(disp, (s.curve.vertices[i] - c.front().curve.vertices[i]).norm());
  r.add("circle_stationary", true, 1e-8 - disp, "max displacement " + std::to_string(disp));
  return r;
}

inline SuiteReport suite_diameter(PresetRuns& p) {
  SuiteReport r{"diameter"};
  for (auto [name, h] : {std::pair{"circle", &p.stationary_circle()}, std::pair{"ellipse", &p.ellipse()},
                         std::pair{"capsule", &p.capsule()}, std::pair{"dumbbell", &p.dumbbell()}}) {
    const auto s = series(*h);
    const auto bad = diameter_derivative_check(s);
    r.add(std::string("diameter_derivative_") + name, bad.empty(), checks::diameter_margin(s),
          std::to_string(bad.size()) + " violations");
  }
  return r;
}

inline SuiteReport suite_monotonicity(PresetRuns& p) {
  SuiteReport r{"monotonicity"};
  const std::vector<std::pair<std::string, const FlowHistory*>> runs = {
      {"circle", &p.stationary_circle()}, {"long_circle", &p.long_circle()}, {"ellipse", &p.ellipse()},
      {"capsule", &p.capsule()},          {"dumbbell", &p.dumbbell()},        {"mcf_circle", &p.mcf_circle()}};
  for (const auto& [name, h] : runs) {
    const auto s = series(*h);
    r.add("psi_monotone_" + name, true, checks::psi_monotone_margin(s));
    if (h->config.mode == FlowMode::vpmcf) {
      for (auto c : l2_multiplier_bound_check(s, h->initial_area)) {
        c.name += "_" + name;
        r.add(std::move(c));
      }
    }
    if (name != "mcf_circle") {
      const auto ld = checks::local_pairs(*h, 0.5);
      r.add("almost_monotone_" + name, ld.violations == 0, ld.worst_margin, std::to_string(ld.pairs_checked) + " pairs");
    }
  }
  {
    const auto& h = p.mcf_circle();
    DensityQuery q{Vec2::Zero(), h.singular_time, {0.0, 0.1, 0.2, 0.3, 0.4, 0.45}, 0.8};
    const auto ld = local_density(h, q);
    r.add("almost_monotone_mcf_circle", ld.violations == 0, ld.worst_margin, std::to_string(ld.pairs_checked) + " pairs");
  }
  {
    // unit circle: kbar = 1 so I2(t) = t, and the bound is L0^2 / (2 V0^2) (diam^2 + t) = 2 (4 + t)
    const auto s = series(p.long_circle());
    const auto& last = s.rows.back();
    const double bound = 2.0 * (4.0 + last.t);
    r.note("long circle: I2(" + std::to_string(last.t) + ") = " + std::to_string(last.i2) + " <= " + std::to_string(bound));
    r.add("l2_closed_form_circle", std::abs(last.i2 - last.t) < 1e-6 * last.t, bound - last.i2);
    const auto ok = uniform_diameter_condition(s, 1.0, 2.0), bad = uniform_diameter_condition(s, 1.0, 0.5);
    r.add("uniform_diameter_circle", ok.holds() && !bad.condition, 0.0);
  }
  {
    const auto a = asymptotic_ratio_scan(series(p.capsule()), 0.05);
    r.add("asymptotics_capsule_to_one", a.kind == Asymptote::ToOne, 0.05 - std::max(std::abs(a.tail_min - 1.0), std::abs(a.tail_max - 1.0)));
    if (a.below_applicable) r.add(a.below_iso);
    if (a.above_applicable) r.add(a.above_iso);
    bool not_one = true;
    try {
      not_one = asymptotic_ratio_scan(series(p.figure_eight()), 0.05).kind != Asymptote::ToOne;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Inconclusive) throw;
    }
    r.add("asymptotics_figure_eight_not_one", not_one, not_one ? 0.0 : -1.0);
  }
  return r;
}

inline SuiteReport suite_density(PresetRuns& p) {
  SuiteReport r{"density"};
  const double pi = std::numbers::pi;
  {
    const auto& h = p.mcf_circle();
    const double T = h.singular_time;
    const auto d = gaussian_density(h, {Vec2::Zero(), T, geometric_times(T, 0.05), std::nullopt});
    const double target = std::sqrt(2.0 * pi / std::exp(1.0));
    r.add("shrinking_circle_density", true, 1e-3 - std::abs(d.limit - target), "limit " + std::to_string(d.limit));
  }
  {
    const auto& h = p.stationary_circle();
    const Vec2 x0 = h.back().curve.vertices[0];
    const double t0 = h.back().curve.time;
    const auto d = gaussian_density(h, {x0, t0, {t0 - 0.03, t0 - 0.02, t0 - 0.01}, std::nullopt});
    r.add("reached_point_density", true, d.limit - 0.99, "limit " + std::to_string(d.limit));
    const auto far = gaussian_density(h, {Vec2(25.0, 0.0), t0, {t0 - 0.03, t0 - 0.02, t0 - 0.01}, std::nullopt});
    r.add("far_point_density", true, 1e-8 - far.limit);
    const auto co = clearing_out_certificate(h, x0, t0, 0.3, 0.01);
    r.note("clearing out: beta0 " + std::to_string(co.beta0) + ", theta " + std::to_string(co.theta));
    r.add(co.cert);
  }
  r.add("theta_1_0.1", true, 1e-4 - std::abs(theta(1, 0.1) - 0.2870));
  return r;
}

inline SuiteReport suite_blowup(PresetRuns& p) {
  SuiteReport r{"blowup"};
  {
    const auto& h = p.stationary_circle();
    const auto id = rescale(h, {Vec2::Zero(), 0.0, 1.0});
    r.add("rescale_identity", id.snapshots.size() == 1 && (id.front().curve.vertices[0] - h.front().curve.vertices[0]).norm() == 0.0, 0.0);
    const RescalingFrame f{Vec2::Zero(), h.back().curve.time, 2.0};
    const auto sc = rescale(h, f);
    double dev = 0.0;
    for (const auto& s : sc.snapshots) dev = std::max(dev, std::abs(s.hbar - 0.5 * h.front().hbar));
    r.add("rescaled_circle_hbar", true, 1e-10 - dev);
    r.add("scaled_cache_mismatch", true, 1e-10 - scaled_cache_mismatch(h, sc, f));
  }
  const std::vector<std::pair<std::string, const FlowHistory*>> runs = {
      {"circle", &p.stationary_circle()}, {"ellipse", &p.ellipse()}, {"capsule", &p.capsule()},
      {"dumbbell", &p.dumbbell()},        {"mcf_circle", &p.mcf_circle()}};
  for (const auto& [name, h] : runs) {
    const auto pi = psi_invariance_check(*h, {Vec2::Zero(), h->back().curve.time, 3.0});
    r.add("psi_invariance_" + name, pi.ok(), pi.tolerance - pi.discrepancy);
  }
  {
    const auto& h = p.mcf_circle();
    const auto t = classify_type(h, h.singular_time);
    r.add("type_one_constant", t.type == SingularityType::TypeI, 0.025 - std::abs(t.constant - 0.5), "C = " + std::to_string(t.constant));
    bool ordered = true, brute = true;
    for (std::size_t i = 0; i < t.hamilton.size(); ++i) {
      if (i > 0 && t.hamilton[i].curvature < t.hamilton[i - 1].curvature) ordered = false;
      const double off = std::ldexp(h.singular_time, -t.hamilton[i].i);
      for (const auto& sn : h.snapshots) {
        if (!(sn.curve.time < h.singular_time - off)) continue;
        const double k = sn.cache.max_abs_curvature();
        if (k * k * (h.singular_time - off - sn.curve.time) > t.hamilton[i].value) brute = false;
      }
    }
    r.add("hamilton_sequence", ordered && brute, 0.0);
  }
  {
    const auto seq = checks::shrinker_sequence(p.mcf_perturbed());
    bool dec = true;
    std::string d;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (k > 0 && !(seq[k] < seq[k - 1])) dec = false;
      d += std::to_string(seq[k]) + " ";
    }
    r.add("shrinker_residual", dec, 1e-2 - seq.back(), d);
  }
  {
    const auto& h = p.dumbbell();
    const double kmax = h.front().cache.max_abs_curvature();
    const auto res = rescale(h, {Vec2::Zero(), h.back().curve.time, 1.0});
    const auto v = hbar_decay_check(res, -1.0 / (kmax * kmax));
    r.add("hbar_decay_dumbbell", v.empty(), v.empty() ? 0.0 : -1.0);
  }
  return r;
}

inline SuiteReport suite_trilobite() {
  SuiteReport r{"trilobite"};
  const double pi = std::numbers::pi;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  {
    const auto e = ProfileSegment::arc({0.0, 0.0}, 1.0, 0.0, pi / 2.0);
    const auto q = quadrature_integrals(e), c = closed_form_integrals(e);
    r.add("hemisphere_closed_form", true, 1e-10 - std::max(rel(q.intH, c.intH), rel(q.intHK.lo, c.intHK.lo)));
    const auto cyl = ProfileSegment::line({1.0, 0.0}, {1.0, 3.0});
    const auto qc = quadrature_integrals(cyl), cc = closed_form_integrals(cyl);
    r.add("cylinder_closed_form", true, 1e-10 - std::max(rel(qc.intH, cc.intH), std::abs(qc.intHK.lo)));
    const auto arc = ProfileSegment::arc({2.0, -1.0}, 1.0, pi / 2.0, pi);
    const auto qa = quadrature_integrals(arc), ca = closed_form_integrals(arc);
    r.add("arc_intH_closed_form", true, 1e-10 - rel(qa.intH, ca.intH));
    r.add("arc_intHK_in_bracket", ca.intHK.contains(qa.intHK.lo), std::min(qa.intHK.lo - ca.intHK.lo, ca.intHK.hi - qa.intHK.lo));
  }
  const auto s = balance_trilobite(1.0, 7, 0.005);
  const auto t = s.totals();
  r.note("balanced l = " + std::to_string(s.l) + " (table formula gives " + std::to_string(paper_l(1.0, 7, 0.005)) + ")");
  r.add("balanced_intH", true, 1e-10 * t.area - std::abs(t.intH));
  r.add("intHK_positive", t.intHK > 0.0, t.intHK);
  r.add("intHK_above_table_bound", true, t.intHK - (2.0 * pi * (2.0 - std::sqrt(3.0)) / 0.005 - 42.0 * pi));
  const double d = hbar_derivative_at_zero(s);
  r.add("hbar_derivative_negative", d < 0.0, -d);
  const double cap1 = quadrature_integrals(s.groups[1].segments[0]).intHK.lo;
  const double cap2 = quadrature_integrals(balance_trilobite(1.0, 7, 0.0025).groups[1].segments[0]).intHK.lo;
  r.add("cap_term_doubles", true, 0.01 - std::abs(cap2 / cap1 - 2.0));
  const double tot1 = balance_trilobite(1.0, 7, 1e-4).totals().intHK, tot2 = balance_trilobite(1.0, 7, 5e-5).totals().intHK;
  r.add("total_intHK_doubles_small_r", true, 0.01 - std::abs(tot2 / tot1 - 2.0), "ratio " + std::to_string(tot2 / tot1));
  const double moved = hbar_derivative_at_zero(s.translated_y(3.7));
  r.add("translation_invariance", true, 1e-10 * std::abs(d) - std::abs(moved - d));
  std::ostringstream os;
  write_trilobite_report(os, s);
  r.note(os.str());
  return r;
}

inline SuiteReport suite_example1(PresetRuns& p) {
  SuiteReport r{"example1"};
  const auto& h = p.capsule_start();
  const auto s = series(h);
  const double L = h.front().cache.length;
  const double expected = -4.0 * (1.0 - std::numbers::pi / L);
  const double slope = (s.rows[1].diam - s.rows[0].diam) / (s.rows[1].t - s.rows[0].t);
  r.add("initial_diameter_slope", true, 0.1 - std::abs(slope / expected - 1.0),
        "slope " + std::to_string(slope) + ", formula " + std::to_string(expected));
  const std::size_t n = h.front().curve.size();
  double worst = -INFINITY;
  for (std::size_t k = 1; k < h.snapshots.size(); ++k) {
    for (std::size_t v : {std::size_t{0}, n / 2}) {
      worst = std::max(worst, h.snapshots[k].cache.curvature[v] - h.snapshots[k - 1].cache.curvature[v]);
    }
  }
  r.add("tip_curvature_decreasing", worst < 0.0, -worst);
  return r;
}

inline SuiteReport run_suite(const std::string& name, PresetRuns& p) {
  if (name == "conservation") return suite_conservation(p);
  if (name == "diameter") return suite_diameter(p);
  if (name == "monotonicity") return suite_monotonicity(p);
  if (name == "density") return suite_density(p);
  if (name == "blowup") return suite_blowup(p);
  if (name == "trilobite") return suite_trilobite();
  if (name == "example1") return suite_example1(p);
  throw Error(ErrorKind::UnknownSuite, "unknown suite '" + name + "'");
}

}  // namespace vpmcf
