#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vpmcf {

// Periodic tridiagonal system
//   lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1] = rhs[i]   (indices mod n)
// solved by the Sherman-Morrison correction of a Thomas sweep. The factorization
// is computed once so several right-hand sides (x and y coordinates, forcing
// terms) share it.
class CyclicTridiagonal {
 public:
  CyclicTridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)), n_(diag.size()) {
    if (n_ < 3 || lower_.size() != n_ || upper_.size() != n_) {
      throw std::invalid_argument("CyclicTridiagonal: need n >= 3 and matching bands");
    }
    corner_low_ = lower_[0];         // coefficient of x[n-1] in row 0
    corner_up_ = upper_[n_ - 1];     // coefficient of x[0] in row n-1
    gamma_ = -diag[0];
    diag[0] -= gamma_;
    diag[n_ - 1] -= corner_up_ * corner_low_ / gamma_;

    // Thomas factorization of the modified (non-periodic) matrix.
    c_prime_.resize(n_);
    denom_.resize(n_);
    denom_[0] = diag[0];
    c_prime_[0] = upper_[0] / denom_[0];
    for (std::size_t i = 1; i < n_; ++i) {
      denom_[i] = diag[i] - lower_[i] * c_prime_[i - 1];
      c_prime_[i] = upper_[i] / denom_[i];
    }

    std::vector<double> u(n_, 0.0);
    u[0] = gamma_;
    u[n_ - 1] = corner_up_;
    z_ = sweep(std::move(u));
    z_factor_ = 1.0 + z_[0] + corner_low_ * z_[n_ - 1] / gamma_;
  }

  std::size_t size() const { return n_; }

  template <class T>
  std::vector<T> solve(std::vector<T> rhs) const {
    if (rhs.size() != n_) throw std::invalid_argument("CyclicTridiagonal: rhs size mismatch");
    std::vector<T> x = sweep(std::move(rhs));
    const T fact = (x[0] + x[n_ - 1] * (corner_low_ / gamma_)) * (1.0 / z_factor_);
    for (std::size_t i = 0; i < n_; ++i) x[i] -= fact * z_[i];
    return x;
  }

 private:
  template <class T>
  std::vector<T> sweep(std::vector<T> d) const {
    d[0] = d[0] * (1.0 / denom_[0]);
    for (std::size_t i = 1; i < n_; ++i) {
      d[i] = (d[i] - d[i - 1] * lower_[i]) * (1.0 / denom_[i]);
    }
    for (std::size_t i = n_ - 1; i-- > 0;) {
      d[i] = d[i] - d[i + 1] * c_prime_[i];
    }
    return d;
  }

  std::vector<double> lower_, upper_;
  std::size_t n_;
  double corner_low_ = 0.0, corner_up_ = 0.0, gamma_ = 0.0;
  std::vector<double> c_prime_, denom_, z_;
  double z_factor_ = 1.0;
};

}  // namespace vpmcf
