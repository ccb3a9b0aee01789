#pragma once

// Shared builders for the test suite.

#include <random>
#include <vector>

#include "hirota/dressing.hpp"
#include "hirota/scattering.hpp"
#include "hirota/types.hpp"

namespace testutil {

using namespace hirota;

inline SolitonSpec make_spec(SignConvention conv, double eps, int components,
                             std::vector<SpectralPoint> pts) {
  SolitonSpec s;
  s.convention = conv;
  s.params = preset_params(conv, eps, components);
  s.points = std::move(pts);
  return s;
}

// Random spec with comfortably separated upper-half-plane points and O(1)
// norm constants; deterministic per seed.
inline SolitonSpec random_spec(SignConvention conv, int n_points, int components,
                               unsigned seed, double eps = 0.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> re(-0.8, 0.8), im(0.35, 0.9), nc(-1.2, 1.2);
  std::vector<SpectralPoint> pts;
  while (static_cast<int>(pts.size()) < n_points) {
    SpectralPoint p;
    p.lambda = {re(rng), im(rng)};
    bool far = true;
    for (const auto& q : pts)
      if (std::abs(q.lambda - p.lambda) < 0.25) far = false;
    if (!far) continue;
    for (int l = 0; l < components; ++l) p.norm.push_back({nc(rng), nc(rng)});
    pts.push_back(std::move(p));
  }
  return make_spec(conv, eps, components, std::move(pts));
}

inline PotentialSlice soliton_slice(const SolitonSpec& s, double t, double L,
                                    double h = 0.02) {
  const int nx = static_cast<int>(std::lround(2.0 * L / h)) + 1;
  const GridSpec g{-L, L, nx, t, t, 1};
  return make_slice(nsoliton_eval(s, g), 0);
}

inline PotentialSlice gaussian_slice(double amp1, cplx amp2, SignConvention conv,
                                     double L = 8.0, double h = 0.01) {
  const int nx = static_cast<int>(std::lround(2.0 * L / h)) + 1;
  std::vector<double> xs(nx);
  std::vector<std::vector<cplx>> q(2, std::vector<cplx>(nx));
  for (int i = 0; i < nx; ++i) {
    xs[i] = -L + i * h;
    const double g = std::exp(-xs[i] * xs[i]);
    q[0][i] = amp1 * g;
    q[1][i] = amp2 * g;
  }
  return make_slice(std::move(xs), std::move(q), conv);
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / (1e-300 + std::abs(b)); }

}  // namespace testutil
