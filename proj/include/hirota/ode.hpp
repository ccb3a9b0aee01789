#pragma once

// Adaptive Dormand-Prince 5(4) integration for complex matrix ODEs, and a
// natural cubic spline for sampled potentials.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "hirota/types.hpp"

namespace hirota {

// Natural cubic spline through (x_i, y_i) with complex values.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<cplx> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    m_.assign(n, cplx{0.0, 0.0});
    if (n < 3) return;
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
    std::vector<double> diag(n - 2), sub(n - 2), sup(n - 2);
    std::vector<cplx> rhs(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
      sub[i - 1] = h[i - 1];
      sup[i - 1] = h[i];
      rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    // Thomas algorithm
    for (std::size_t i = 1; i < rhs.size(); ++i) {
      const double w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    if (!rhs.empty()) {
      m_[n - 2] = rhs.back() / diag.back();
      for (std::size_t i = rhs.size() - 1; i-- > 0;)
        m_[i + 1] = (rhs[i] - sup[i] * m_[i + 2]) / diag[i];
    }
  }

  cplx operator()(double x) const {
    const std::size_t n = x_.size();
    if (n == 0) return {0.0, 0.0};
    if (n == 1 || x <= x_.front()) return edge(x, true);
    if (x >= x_.back()) return edge(x, false);
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (x_[mid] <= x ? lo : hi) = mid;
    }
    const double h = x_[lo + 1] - x_[lo];
    const double a = (x_[lo + 1] - x) / h, b = (x - x_[lo]) / h;
    return a * y_[lo] + b * y_[lo + 1] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[lo + 1]) * (h * h) / 6.0;
  }

 private:
  cplx edge(double x, bool left) const {
    // clamp: potentials are decayed to ~0 at the ends anyway
    (void)x;
    return left ? y_.front() : y_.back();
  }
  std::vector<double> x_;
  std::vector<cplx> y_;
  std::vector<cplx> m_;
};

// Integrate dY/dx = f(x, Y) from xs.front() through every node of xs, adaptive
// RK45 with dense node output (xs monotonic, either direction).
inline std::vector<Mat> rk45_dense(const std::function<Mat(double, const Mat&)>& f,
                                   const Mat& y0, const std::vector<double>& xs,
                                   double rtol = 1e-10, double atol = 1e-12) {
  static const double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static const double b4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695,
                               393.0 / 640,    -92097.0 / 339200, 187.0 / 2100,
                               1.0 / 40};

  std::vector<Mat> out;
  out.reserve(xs.size());
  Mat y = y0;
  out.push_back(y);
  if (xs.size() < 2) return out;
  const double span = std::abs(xs.back() - xs.front());
  const double dir = xs.back() > xs.front() ? 1.0 : -1.0;
  double x = xs.front();
  double h = dir * std::min(0.1, span / 10.0);
  Mat k[7];
  long steps = 0;
  for (std::size_t target = 1; target < xs.size(); ++target) {
    const double xt = xs[target];
    while (dir * (xt - x) > 1e-14 * span) {
      if (dir * (x + h - xt) > 0.0) h = xt - x;
      if (++steps > 20000000 || std::abs(h) < 1e-13 * span)
        throw StiffnessFailure("rk45: step size underflow");
      k[0] = f(x, y);
      for (int s = 1; s < 7; ++s) {
        Mat ys = y;
        for (int m = 0; m < s; ++m)
          if (a[s][m] != 0.0) ys += h * a[s][m] * k[m];
        k[s] = f(x + c[s] * h, ys);
      }
      Mat y5 = y;
      for (int s = 0; s < 6; ++s)
        if (a[6][s] != 0.0) y5 += h * a[6][s] * k[s];
      Mat y4 = y;
      for (int s = 0; s < 7; ++s)
        if (b4[s] != 0.0) y4 += h * b4[s] * k[s];
      double err = 0.0;
      for (int r = 0; r < y.rows(); ++r)
        for (int cc = 0; cc < y.cols(); ++cc) {
          const double sc = atol + rtol * std::max(std::abs(y(r, cc)), std::abs(y5(r, cc)));
          err = std::max(err, std::abs(y5(r, cc) - y4(r, cc)) / sc);
        }
      if (err <= 1.0) {
        x += h;
        y = y5;
      }
      const double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::min(5.0, std::max(0.2, fac));
    }
    x = xt;
    out.push_back(y);
  }
  return out;
}

}  // namespace hirota
