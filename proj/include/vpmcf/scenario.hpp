#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <variant>

#include "vpmcf/curve.hpp"
#include "vpmcf/error.hpp"
#include "vpmcf/flow.hpp"
#include "vpmcf/io.hpp"

namespace vpmcf {

struct CircleSpec {
  double radius = 1.0;
  double perturbation = 0.0;  // relative amplitude of random low-mode radial noise
};
struct EllipseSpec {
  double a = 2.0, b = 1.0;
};
struct CapsuleSpec {
  double eps = 0.1;
};
struct DumbbellSpec {
  double neck_width = 0.2;
};
struct FigureEightSpec {
  double asymmetry = 1e-3;
};
struct FileSpec {
  std::string path;
};

using Scenario = std::variant<CircleSpec, EllipseSpec, CapsuleSpec, DumbbellSpec, FigureEightSpec, FileSpec>;

struct ScenarioConfig {
  Scenario scenario = CircleSpec{};
  FlowConfig flow;
  std::string output = "out";
  std::size_t snapshot_every = 1000;
  std::size_t series_every = 10;
  std::uint64_t seed = 0;
};

namespace detail {

constexpr double kPi = std::numbers::pi;

inline ClosedCurve sample_parametric(std::size_t n, const auto& f, double phase = 0.0) {
  ClosedCurve c;
  c.vertices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.vertices.push_back(f(2.0 * kPi * (static_cast<double>(i) + phase) / static_cast<double>(n)));
  return c;
}

inline double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

// Quarter of the capsule from the bottom tip (0,0) to the rightmost point at height 1/2:
// an arc of the radius-1/2 circle centred at (0,1/2), a curvature ramp down to zero, a vertical segment.
class CapsuleQuarter {
 public:
  CapsuleQuarter(double s_arc, double s_ramp) : sa_(s_arc), st_(s_ramp) {
    bump_ = 2.0 * ((kPi / 2.0 - 2.0 * sa_) / st_ - 1.0);
    ramp_end_ = sa_ + st_;
    const Vec2 p = ramp_point(st_);
    x_end_ = p.x();
    y_end_ = p.y();
  }

  double length() const { return ramp_end_ + 0.5 - y_end_; }
  double ramp_curvature_min() const {
    double m = 2.0;
    for (int k = 0; k <= 400; ++k) m = std::min(m, kappa(st_ * k / 400.0));
    return m;
  }

  Vec2 point(double s) const {
    if (s <= sa_) return {0.5 * std::sin(2.0 * s), 0.5 - 0.5 * std::cos(2.0 * s)};
    if (s <= ramp_end_) return ramp_point(s - sa_);
    return {x_end_, y_end_ + (s - ramp_end_)};
  }

 private:
  double kappa(double sig) const {
    const double u = sig / st_;
    const double sn = std::sin(kPi * u);
    return 2.0 * (1.0 - smoothstep(u)) + bump_ * sn * sn;
  }
  // tangent angle along the ramp, closed form of the integral of kappa
  double angle(double sig) const {
    const double u = sig / st_;
    return 2.0 * sa_ + 2.0 * st_ * (u - u * u * u + 0.5 * u * u * u * u) +
           bump_ * (0.5 * sig - st_ * std::sin(2.0 * kPi * u) / (4.0 * kPi));
  }
  Vec2 ramp_point(double sig) const {
    using boost::math::quadrature::gauss_kronrod;
    const Vec2 start(0.5 * std::sin(2.0 * sa_), 0.5 - 0.5 * std::cos(2.0 * sa_));
    if (sig <= 0.0) return start;
    const double dx = gauss_kronrod<double, 61>::integrate([&](double s) { return std::cos(angle(s)); }, 0.0, sig, 8, 1e-15);
    const double dy = gauss_kronrod<double, 61>::integrate([&](double s) { return std::sin(angle(s)); }, 0.0, sig, 8, 1e-15);
    return start + Vec2(dx, dy);
  }

  double sa_, st_, bump_ = 0.0, ramp_end_ = 0.0, x_end_ = 0.0, y_end_ = 0.0;
};

}  // namespace detail

inline ClosedCurve make_circle(const CircleSpec& s, std::size_t n, std::uint64_t seed = 0) {
  if (!(s.radius > 0.0) || s.perturbation < 0.0) throw Error(ErrorKind::BadParameters, "circle needs radius > 0");
  std::array<double, 8> coef{};
  if (s.perturbation > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& c : coef) c = u(rng);
  }
  return detail::sample_parametric(n, [&](double th) {
    double r = 1.0;
    for (int k = 0; k < 4; ++k) {
      r += s.perturbation * (coef[2 * k] * std::cos((k + 2) * th) + coef[2 * k + 1] * std::sin((k + 2) * th)) / (k + 2);
    }
    return Vec2(s.radius * r * std::cos(th), s.radius * r * std::sin(th));
  });
}

inline ClosedCurve make_ellipse(const EllipseSpec& s, std::size_t n) {
  if (!(s.a > 0.0 && s.b > 0.0)) throw Error(ErrorKind::BadParameters, "ellipse needs positive semi-axes");
  auto dense = detail::sample_parametric(8 * n, [&](double th) { return Vec2(s.a * std::cos(th), s.b * std::sin(th)); });
  return resample_uniform(dense, n);
}

/// Convex curve of diameter 1 and length 2 + eps; tips at (0,0) and (0,1) are vertices 0 and n/2.
inline ClosedCurve make_capsule(const CapsuleSpec& s, std::size_t n) {
  if (!(s.eps > 0.0 && s.eps < 1.0)) throw Error(ErrorKind::BadParameters, "capsule needs eps in (0,1)");
  if (n % 4 != 0) throw Error(ErrorKind::BadParameters, "capsule vertex count must be divisible by 4");
  const double sa = s.eps / 8.0;
  const double quarter = (2.0 + s.eps) / 4.0;
  double lo = 1e-6, hi = detail::kPi / 2.0 - 2.0 * sa;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::CapsuleQuarter(sa, mid).length() < quarter ? lo : hi) = mid;
  }
  const detail::CapsuleQuarter q(sa, 0.5 * (lo + hi));
  if (std::abs(q.length() - quarter) > 1e-10 || q.ramp_curvature_min() < 0.0) {
    throw Error(ErrorKind::BadParameters, "no convex capsule with eps = " + std::to_string(s.eps));
  }
  const double L = 4.0 * quarter;
  ClosedCurve c;
  for (std::size_t k = 0; k < n; ++k) {
    const double sk = L * static_cast<double>(k) / static_cast<double>(n);
    const int part = std::min(3, static_cast<int>(sk / quarter));
    const double loc = sk - part * quarter;
    Vec2 p;
    switch (part) {
      case 0: p = q.point(loc); break;
      case 1: p = q.point(quarter - loc); p.y() = 1.0 - p.y(); break;
      case 2: p = q.point(loc); p = Vec2(-p.x(), 1.0 - p.y()); break;
      default: p = q.point(quarter - loc); p.x() = -p.x(); break;
    }
    c.vertices.push_back(p);
  }
  return c;
}

/// Two lobes joined by a neck of the given width; the neck crosses vertices n/4 and 3n/4.
inline ClosedCurve make_dumbbell(const DumbbellSpec& s, std::size_t n) {
  constexpr double A = 2.0, B = 1.5;
  if (!(s.neck_width > 0.0 && s.neck_width < B)) throw Error(ErrorKind::BadParameters, "dumbbell neck width must be in (0,1.5)");
  const double delta = s.neck_width / (2.0 * B - s.neck_width);
  auto dense = detail::sample_parametric(16 * n, [&](double th) {
    const double c = std::cos(th);
    return Vec2(A * c, B * std::sin(th) * (delta + c * c) / (1.0 + delta));
  });
  return resample_uniform(dense, n);
}

/// Lemniscate with slightly unequal lobes, so the signed area is small but nonzero.
inline ClosedCurve make_figure_eight(const FigureEightSpec& s, std::size_t n) {
  if (!(std::abs(s.asymmetry) < 0.5)) throw Error(ErrorKind::BadParameters, "figure-eight asymmetry must be below 1/2");
  return detail::sample_parametric(
      n,
      [&](double th) {
        const double c = std::cos(th);
        return Vec2(c, std::sin(th) * c * (1.0 + s.asymmetry * c));
      },
      0.5);
}

inline ClosedCurve make_scenario(const ScenarioConfig& cfg) {
  const std::size_t n = cfg.flow.N;
  check_vertex_count(n);
  return std::visit(
      [&](const auto& s) -> ClosedCurve {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CircleSpec>) return make_circle(s, n, cfg.seed);
        else if constexpr (std::is_same_v<S, EllipseSpec>) return make_ellipse(s, n);
        else if constexpr (std::is_same_v<S, CapsuleSpec>) return make_capsule(s, n);
        else if constexpr (std::is_same_v<S, DumbbellSpec>) return make_dumbbell(s, n);
        else if constexpr (std::is_same_v<S, FigureEightSpec>) return make_figure_eight(s, n);
        else {
          ClosedCurve c = read_snapshot(s.path);
          return c.size() == n ? c : resample_uniform(c, n);
        }
      },
      cfg.scenario);
}

// ---- JSON config ------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::BadParameters, where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw Error(ErrorKind::BadParameters, "unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadParameters, std::string("bad value for '") + key + "': " + e.what());
  }
}

inline double positive(const json& j, const char* key, double fallback) {
  const double v = get_or<double>(j, key, fallback);
  if (!(v > 0.0)) throw Error(ErrorKind::BadParameters, std::string("'") + key + "' must be positive");
  return v;
}

inline std::size_t count(const json& j, const char* key, std::size_t fallback) {
  const auto v = get_or<std::int64_t>(j, key, static_cast<std::int64_t>(fallback));
  if (v <= 0) throw Error(ErrorKind::BadParameters, std::string("'") + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

inline Scenario parse_scenario(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw Error(ErrorKind::BadParameters, "scenario needs a 'type'");
  const auto type = get_or<std::string>(j, "type", "");
  if (type == "circle") {
    reject_unknown(j, {"type", "R", "perturbation"}, "circle scenario");
    CircleSpec s{positive(j, "R", 1.0), get_or<double>(j, "perturbation", 0.0)};
    if (s.perturbation < 0.0) throw Error(ErrorKind::BadParameters, "'perturbation' must be non-negative");
    return s;
  }
  if (type == "ellipse") {
    reject_unknown(j, {"type", "a", "b"}, "ellipse scenario");
    return EllipseSpec{positive(j, "a", 2.0), positive(j, "b", 1.0)};
  }
  if (type == "capsule") {
    reject_unknown(j, {"type", "eps"}, "capsule scenario");
    const double eps = positive(j, "eps", 0.1);
    if (eps >= 1.0) throw Error(ErrorKind::BadParameters, "capsule needs eps in (0,1)");
    return CapsuleSpec{eps};
  }
  if (type == "dumbbell") {
    reject_unknown(j, {"type", "neck_width"}, "dumbbell scenario");
    return DumbbellSpec{positive(j, "neck_width", 0.2)};
  }
  if (type == "figure_eight") {
    reject_unknown(j, {"type", "asymmetry"}, "figure_eight scenario");
    return FigureEightSpec{positive(j, "asymmetry", 1e-3)};
  }
  if (type == "file") {
    reject_unknown(j, {"type", "path"}, "file scenario");
    const auto path = get_or<std::string>(j, "path", "");
    if (path.empty()) throw Error(ErrorKind::BadParameters, "file scenario needs 'path'");
    return FileSpec{path};
  }
  throw Error(ErrorKind::BadParameters, "unknown scenario type '" + type + "'");
}

inline FlowConfig parse_flow(const json& j) {
  reject_unknown(j, {"mode", "multiplier", "dt", "t_end", "N", "resample_every", "cfl_guard"}, "flow");
  FlowConfig f;
  const auto mode = get_or<std::string>(j, "mode", "vpmcf");
  if (mode == "vpmcf") f.mode = FlowMode::vpmcf;
  else if (mode == "mcf") f.mode = FlowMode::mcf;
  else throw Error(ErrorKind::BadParameters, "mode must be 'vpmcf' or 'mcf'");
  const auto mult = get_or<std::string>(j, "multiplier", "constrained");
  if (mult == "constrained") f.multiplier = Multiplier::constrained;
  else if (mult == "analytic") f.multiplier = Multiplier::analytic;
  else throw Error(ErrorKind::BadParameters, "multiplier must be 'constrained' or 'analytic'");
  f.dt = positive(j, "dt", f.dt);
  f.t_end = positive(j, "t_end", f.t_end);
  f.N = count(j, "N", f.N);
  f.resample_every = count(j, "resample_every", f.resample_every);
  f.cfl_guard = positive(j, "cfl_guard", f.cfl_guard);
  return f;
}

}  // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& j) {
  detail::reject_unknown(j, {"scenario", "flow", "output", "snapshot_every", "series_every", "seed"}, "config");
  if (!j.contains("scenario")) throw Error(ErrorKind::BadParameters, "config needs a 'scenario'");
  ScenarioConfig c;
  c.scenario = detail::parse_scenario(j.at("scenario"));
  c.flow = detail::parse_flow(j.contains("flow") ? j.at("flow") : nlohmann::json::object());
  c.output = detail::get_or<std::string>(j, "output", c.output);
  c.snapshot_every = detail::count(j, "snapshot_every", c.snapshot_every);
  c.series_every = detail::count(j, "series_every", c.series_every);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  c.flow.record_every = c.series_every;
  validate(c.flow);
  return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadParameters, "config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

}  // namespace vpmcf
