#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "vpmcf/cyclic_tridiagonal.hpp"
#include "vpmcf/error.hpp"

namespace vpmcf {

using Vec2 = Eigen::Vector2d;

inline constexpr std::size_t kMinVertices = 16;

struct ClosedCurve {
  std::vector<Vec2> vertices;
  double time = 0.0;

  std::size_t size() const { return vertices.size(); }
  const Vec2& operator[](std::size_t i) const { return vertices[i % vertices.size()]; }
};

struct GeoCache {
  std::vector<double> edge_lengths;  // edge i joins vertex i to vertex i+1
  std::vector<Vec2> tangents;
  std::vector<Vec2> normals;
  std::vector<double> curvature;
  std::vector<double> dual_lengths;  // half the two adjacent edges
  double length = 0.0;
  double area = 0.0;
  double kappa_bar = 0.0;
  int turning_number = 0;
  double diameter = 0.0;
  std::size_t diam_i = 0;
  std::size_t diam_j = 0;

  double max_abs_curvature() const {
    double m = 0.0;
    for (double k : curvature) m = std::max(m, std::abs(k));
    return m;
  }
  double min_edge() const { return *std::min_element(edge_lengths.begin(), edge_lengths.end()); }
  double max_edge() const { return *std::max_element(edge_lengths.begin(), edge_lengths.end()); }
  double mean_edge() const { return length / static_cast<double>(edge_lengths.size()); }
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// outward normal for a counterclockwise tangent: nu = -J T with J the +90 degree rotation
inline Vec2 outer_normal(const Vec2& t) { return Vec2(t.y(), -t.x()); }

inline void check_vertex_count(std::size_t n) {
  if (n < kMinVertices) {
    throw Error(ErrorKind::TooFewVertices,
                "closed curve needs at least " + std::to_string(kMinVertices) + " vertices, got " + std::to_string(n));
  }
}

inline std::vector<double> edge_lengths(const ClosedCurve& c) {
  const std::size_t n = c.size();
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = (c.vertices[(i + 1) % n] - c.vertices[i]).norm();
    if (!(h[i] > 0.0) || !std::isfinite(h[i])) {
      throw Error(ErrorKind::DegenerateEdge, "edge " + std::to_string(i) + " has length " + std::to_string(h[i]));
    }
  }
  return h;
}

inline double shoelace_area(std::span<const Vec2> v) {
  const std::size_t n = v.size();
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) a += cross(v[i], v[(i + 1) % n]);
  return 0.5 * a;
}

/// exhaustive pair scan; returns (d, i, j)
inline std::tuple<double, std::size_t, std::size_t> diameter_scan(std::span<const Vec2> v) {
  double best = -1.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      const double d2 = (v[i] - v[j]).squaredNorm();
      if (d2 > best) {
        best = d2;
        bi = i;
        bj = j;
      }
    }
  }
  return {std::sqrt(std::max(best, 0.0)), bi, bj};
}

/// with_diameter = false skips the quadratic pair scan (the time stepper does not need it)
inline GeoCache build_cache(const ClosedCurve& c, bool with_diameter = true) {
  check_vertex_count(c.size());
  const std::size_t n = c.size();
  const auto& X = c.vertices;
  GeoCache g;
  g.edge_lengths = edge_lengths(c);
  g.tangents.resize(n);
  g.normals.resize(n);
  g.curvature.resize(n);
  g.dual_lengths.resize(n);

  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    const double hm = g.edge_lengths[im], hp = g.edge_lengths[i];
    const Vec2 fwd = X[ip] - X[i], bwd = X[i] - X[im];
    // second-order one-sided weights on a nonuniform stencil
    const Vec2 d1 = (hm * hm * fwd + hp * hp * bwd) / (hm * hp * (hm + hp));
    const Vec2 d2 = 2.0 * (fwd / hp - bwd / hm) / (hm + hp);
    g.tangents[i] = d1.normalized();
    g.normals[i] = outer_normal(g.tangents[i]);
    g.curvature[i] = -d2.dot(g.normals[i]);
    g.dual_lengths[i] = 0.5 * (hm + hp);
    turning += std::atan2(cross(bwd, fwd), bwd.dot(fwd));
  }

  for (double h : g.edge_lengths) g.length += h;
  double kw = 0.0;
  for (std::size_t i = 0; i < n; ++i) kw += g.curvature[i] * g.dual_lengths[i];
  g.kappa_bar = kw / g.length;
  g.turning_number = static_cast<int>(std::lround(turning / (2.0 * std::numbers::pi)));
  g.area = shoelace_area(X);
  if (with_diameter) std::tie(g.diameter, g.diam_i, g.diam_j) = diameter_scan(X);
  return g;
}

inline double isoperimetric_ratio(const GeoCache& g) { return 2.0 * g.kappa_bar * g.area / g.length; }

inline ClosedCurve transformed(const ClosedCurve& c, double scale, const Vec2& shift) {
  ClosedCurve out{c.vertices, c.time};
  for (auto& v : out.vertices) v = scale * (v + shift);
  return out;
}

inline ClosedCurve reversed(const ClosedCurve& c) {
  ClosedCurve out{c.vertices, c.time};
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

namespace detail {

// Gauss-Legendre nodes and weights on [-1,1], 8 points
inline constexpr std::array<double, 8> kGLx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGLw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                               0.2223810344533745, 0.1012285362903763};

/// Periodic cubic spline through the vertices, knots at cumulative chord length.
class PeriodicSpline {
 public:
  explicit PeriodicSpline(const std::vector<Vec2>& pts) : p_(pts) {
    const std::size_t n = pts.size();
    h_.resize(n);
    u_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      h_[i] = (pts[(i + 1) % n] - pts[i]).norm();
      u_[i + 1] = u_[i] + h_[i];
    }
    std::vector<double> lo(n), di(n), up(n);
    std::vector<Vec2> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
      lo[i] = h_[im];
      di[i] = 2.0 * (h_[im] + h_[i]);
      up[i] = h_[i];
      rhs[i] = 6.0 * ((pts[ip] - pts[i]) / h_[i] - (pts[i] - pts[im]) / h_[im]);
    }
    m_ = CyclicTridiagonal(lo, di, up).solve(std::move(rhs));
    seg_len_.resize(n);
    for (std::size_t i = 0; i < n; ++i) seg_len_[i] = arc(i, h_[i]);
  }

  std::size_t segments() const { return h_.size(); }
  double segment_length(std::size_t i) const { return seg_len_[i]; }
  double knot_spacing(std::size_t i) const { return h_[i]; }

  Vec2 value(std::size_t i, double t) const {
    const std::size_t j = (i + 1) % h_.size();
    const double h = h_[i], a = h - t;
    return (m_[i] * (a * a * a) + m_[j] * (t * t * t)) / (6.0 * h) + (p_[i] / h - m_[i] * h / 6.0) * a +
           (p_[j] / h - m_[j] * h / 6.0) * t;
  }

  Vec2 derivative(std::size_t i, double t) const {
    const std::size_t j = (i + 1) % h_.size();
    const double h = h_[i], a = h - t;
    return (-m_[i] * (a * a) + m_[j] * (t * t)) / (2.0 * h) + (p_[j] - p_[i]) / h - (m_[j] - m_[i]) * h / 6.0;
  }

  /// arclength of segment i from local parameter 0 to t
  double arc(std::size_t i, double t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < 8; ++k) s += kGLw[k] * derivative(i, 0.5 * t * (kGLx[k] + 1.0)).norm();
    return 0.5 * t * s;
  }

  /// local parameter in segment i whose arclength from the segment start is target
  double invert(std::size_t i, double target) const {
    const double h = h_[i];
    double lo = 0.0, hi = h;
    double t = h * target / seg_len_[i];
    for (int it = 0; it < 50; ++it) {
      const double f = arc(i, t) - target;
      if (std::abs(f) <= 1e-15 * (1.0 + seg_len_[i])) break;
      if (f > 0) hi = t; else lo = t;
      const double speed = derivative(i, t).norm();
      double next = t - f / speed;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    return t;
  }

 private:
  std::vector<Vec2> p_;
  std::vector<double> h_, u_, seg_len_;
  std::vector<Vec2> m_;
};

}  // namespace detail

/// Equal-arclength redistribution along a periodic cubic interpolant; vertex 0 stays put.
inline ClosedCurve resample_uniform(const ClosedCurve& c, std::size_t n_out) {
  check_vertex_count(n_out);
  check_vertex_count(c.size());
  (void)edge_lengths(c);
  const detail::PeriodicSpline sp(c.vertices);
  double total = 0.0;
  for (std::size_t i = 0; i < sp.segments(); ++i) total += sp.segment_length(i);

  ClosedCurve out;
  out.time = c.time;
  out.vertices.reserve(n_out);
  out.vertices.push_back(c.vertices[0]);
  std::size_t seg = 0;
  double seg_start = 0.0;
  for (std::size_t k = 1; k < n_out; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n_out);
    while (seg + 1 < sp.segments() && seg_start + sp.segment_length(seg) < s) {
      seg_start += sp.segment_length(seg);
      ++seg;
    }
    const double t = sp.invert(seg, s - seg_start);
    out.vertices.push_back(sp.value(seg, t));
  }
  return out;
}

/// H-bar from the velocity field via the first variation of the enclosed area,
/// (integral <dX/dt, X - x> + L) / (2 V) with x the vertex centroid.
inline double average_curvature_nonlocal(const ClosedCurve& c, std::span<const double> normal_speed) {
  const GeoCache g = build_cache(c, false);
  if (normal_speed.size() != c.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "velocity field size does not match vertex count");
  }
  if (std::abs(g.area) < 1e-12 * g.length * g.length) {
    throw Error(ErrorKind::ZeroVolume, "signed area " + std::to_string(g.area) + " is numerically zero");
  }
  Vec2 centroid = Vec2::Zero();
  for (const auto& v : c.vertices) centroid += v;
  centroid /= static_cast<double>(c.size());
  double moment = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    moment += normal_speed[i] * g.normals[i].dot(c.vertices[i] - centroid) * g.dual_lengths[i];
  }
  return (moment + g.length) / (2.0 * g.area);
}

struct TouchPair {
  std::size_t p = 0, q = 0;
  double separation = 0.0;
  double alignment = 0.0;  // <nu(p), nu(q)>
  double side_p = 0.0;     // <nu(p), X(q) - X(p)>
  double side_q = 0.0;     // <nu(q), X(p) - X(q)>
  bool flagged = false;
};

struct TouchReport {
  std::vector<TouchPair> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t flagged_count() const {
    return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const TouchPair& t) { return t.flagged; }));
  }
};

inline TouchReport detect_touch(const ClosedCurve& c, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::BadParameters, "touch radius must be positive");
  const GeoCache g = build_cache(c, false);
  const std::size_t n = c.size();
  const std::size_t min_sep = std::max<std::size_t>(2, n / 8);
  TouchReport rep;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const std::size_t d = std::min(q - p, n - (q - p));
      if (d < min_sep) continue;
      const Vec2 diff = c.vertices[q] - c.vertices[p];
      const double sep = diff.norm();
      if (sep >= eps) continue;
      TouchPair t;
      t.p = p;
      t.q = q;
      t.separation = sep;
      t.alignment = g.normals[p].dot(g.normals[q]);
      t.side_p = g.normals[p].dot(diff);
      t.side_q = g.normals[q].dot(-diff);
      t.flagged = t.alignment < -0.9 && t.side_p < 0.0 && t.side_q < 0.0;
      rep.pairs.push_back(t);
    }
  }
  return rep;
}

}  // namespace vpmcf
