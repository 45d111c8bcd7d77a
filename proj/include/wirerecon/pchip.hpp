#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "wirerecon/error.hpp"

namespace wirerecon {

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson).
/// Outside [x_0, x_last] the end values are held constant.
class Pchip {
 public:
  Pchip(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    if (x_.size() != y_.size()) throw Error(Errc::InvalidArgument, "x/y size mismatch");
    if (x_.size() < 2) throw Error(Errc::NonMonotoneInput, "PCHIP needs at least two pairs");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
        throw Error(Errc::InvalidArgument, "PCHIP inputs must be finite");
      }
      if (i > 0 && !(x_[i] > x_[i - 1])) {
        throw Error(Errc::NonMonotoneInput, "x must be strictly increasing");
      }
      if (i > 0 && y_[i] < y_[i - 1]) throw Error(Errc::NonMonotoneInput, "y must be nondecreasing");
    }
    compute_slopes();
  }

  double operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(std::distance(x_.begin(), it)) - 1;
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
  }

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& slopes() const { return m_; }

 private:
  void compute_slopes() {
    const std::size_t n = x_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) delta[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);

    m_.assign(n, 0.0);
    m_.front() = delta.front();
    m_.back() = delta.back();
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] > 0.0) m_[k] = 0.5 * (delta[k - 1] + delta[k]);
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (delta[k] == 0.0) {
        m_[k] = 0.0;
        m_[k + 1] = 0.0;
        continue;
      }
      const double a = m_[k] / delta[k];
      const double b = m_[k + 1] / delta[k];
      const double r = a * a + b * b;
      if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        m_[k] = tau * a * delta[k];
        m_[k + 1] = tau * b * delta[k];
      }
    }
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

inline Pchip pchip_fit(std::span<const double> x, std::span<const double> y) { return Pchip(x, y); }

}  // namespace wirerecon
