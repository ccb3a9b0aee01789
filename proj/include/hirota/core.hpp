#pragma once

// Phase kernel, dressing vectors and spec validation.

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "hirota/types.hpp"

namespace hirota {

using Vec = Eigen::VectorXcd;
using RowVec = Eigen::RowVectorXcd;
using Mat = Eigen::MatrixXcd;

// theta(lambda) = (i/2) [lambda x - (lambda^2 + eps lambda^3) t]
inline cplx theta(cplx lambda, double epsilon, double x, double t) {
  const cplx l2 = lambda * lambda;
  return 0.5 * I * (lambda * x - (l2 + epsilon * l2 * lambda) * t);
}

// Column vector v = e^{theta sigma3} v0 and row vector
// vhat = v0^dag e^{theta* sigma3} sigma3 (theta* evaluated at lambda*), with the
// Regularized convention flipping the sign the trailing sigma3 puts on the
// first entry.  v0 = [1, m, n, ...]^T.
struct DressingVectors {
  Vec v;
  RowVec vhat;
};

inline DressingVectors dressing_vectors(const SpectralPoint& p, SignConvention conv,
                                        double epsilon, double x, double t) {
  const cplx th = theta(p.lambda, epsilon, x, t);
  if (std::abs(th.real()) > 700.0)
    throw std::range_error("dressing_vectors: |Re theta| exceeds exponent range");
  const cplx thc = std::conj(th);  // theta at lambda*, real (x,t,epsilon)
  const int c = static_cast<int>(p.norm.size());
  DressingVectors out;
  out.v.resize(c + 1);
  out.vhat.resize(c + 1);
  out.v(0) = std::exp(-th);
  out.vhat(0) = kernel_sign(conv) * std::exp(-thc);
  const cplx ep = std::exp(th);
  const cplx epc = std::exp(thc);
  for (int l = 0; l < c; ++l) {
    out.v(l + 1) = p.norm[l] * ep;
    out.vhat(l + 1) = std::conj(p.norm[l]) * epc;
  }
  return out;
}

inline ValidationReport validate_spec(const SolitonSpec& spec) {
  ValidationReport r;
  auto err = [&r](const std::string& m) { r.errors.push_back(m); };
  if (spec.params.components < 1) err("components must be >= 1");
  if (spec.points.empty()) err("at least one spectral point required");
  const std::size_t n = spec.points.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& p = spec.points[j];
    std::ostringstream tag;
    tag << "point " << j << ": ";
    if (!(p.lambda.imag() > 0.0))
      err(tag.str() + "spectral point not in upper half-plane");
    if (static_cast<int>(p.norm.size()) != spec.params.components)
      err(tag.str() + "normalization constant count does not match components");
    bool all_zero = true;
    for (const auto& m : p.norm)
      if (m != cplx{0.0, 0.0}) all_zero = false;
    if (all_zero) err(tag.str() + "normalization constants are all zero");
    for (std::size_t k = j + 1; k < n; ++k)
      if (spec.points[k].lambda == p.lambda) {
        std::ostringstream d;
        d << "points " << j << " and " << k << ": duplicate lambda (simple-zeros assumption broken)";
        err(d.str());
      }
  }
  return r;
}

inline Eigen::MatrixXcd sigma3(int c) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(c + 1, c + 1);
  s(0, 0) = -1.0;
  return s;
}

}  // namespace hirota
