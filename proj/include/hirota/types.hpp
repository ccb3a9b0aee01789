#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hirota {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

// Which sign the dressing kernel carries on the e^{-(theta_j*+theta_k)} term.
// AsPrinted (s = -1) produces the singular csch family and pairs with the
// defocusing parameter preset k1 = i; Regularized (s = +1) produces the bounded
// sech family and pairs with k1 = 1.  Both are first-class throughout.
enum class SignConvention { AsPrinted, Regularized };

inline double kernel_sign(SignConvention c) {
  return c == SignConvention::AsPrinted ? -1.0 : 1.0;
}

// Sign of the first column of the potential matrix Q (+q* vs -q*), tied to the
// same convention: AsPrinted fields close the Lax equations with +q*,
// Regularized fields with -q*.
inline double q_column_sign(SignConvention c) {
  return c == SignConvention::AsPrinted ? 1.0 : -1.0;
}

struct HirotaParams {
  double epsilon = 0.0;
  cplx k1{0.0, 1.0};
  cplx A1{0.0, 0.5};
  int components = 2;
};

// Parameter preset under which fields of the given convention satisfy the
// system exactly (verified by the residual suite).
inline HirotaParams preset_params(SignConvention c, double epsilon, int components = 2) {
  HirotaParams p;
  p.epsilon = epsilon;
  p.components = components;
  p.k1 = (c == SignConvention::AsPrinted) ? cplx{0.0, 1.0} : cplx{1.0, 0.0};
  p.A1 = cplx{0.0, 0.5};
  return p;
}

struct SpectralPoint {
  cplx lambda;               // in the upper half-plane
  std::vector<cplx> norm;    // c normalization constants (m, n, ...)
};

struct SolitonSpec {
  HirotaParams params;
  std::vector<SpectralPoint> points;
  SignConvention convention = SignConvention::AsPrinted;
};

struct GridSpec {
  double x0 = -10.0, x1 = 10.0;
  int nx = 2;
  double t0 = 0.0, t1 = 0.0;
  int nt = 1;

  double hx() const { return nx > 1 ? (x1 - x0) / (nx - 1) : 0.0; }
  double ht() const { return nt > 1 ? (t1 - t0) / (nt - 1) : 0.0; }
  double x(int i) const { return x0 + i * hx(); }
  double t(int j) const { return nt > 1 ? t0 + j * ht() : t0; }
};

struct FieldGrid {
  GridSpec grid;
  int components = 2;
  SignConvention convention = SignConvention::AsPrinted;
  std::vector<cplx> values;      // index: (j*nx + i)*components + l
  std::vector<std::uint8_t> mask;  // nonzero = invalid (pole or stencil edge)

  FieldGrid() = default;
  FieldGrid(const GridSpec& g, int c, SignConvention conv = SignConvention::AsPrinted)
      : grid(g), components(c), convention(conv),
        values(static_cast<std::size_t>(g.nx) * g.nt * c),
        mask(static_cast<std::size_t>(g.nx) * g.nt, 0) {}

  std::size_t node(int i, int j) const {
    return static_cast<std::size_t>(j) * grid.nx + i;
  }
  cplx& at(int i, int j, int l) { return values[node(i, j) * components + l]; }
  const cplx& at(int i, int j, int l) const { return values[node(i, j) * components + l]; }
  bool masked(int i, int j) const { return mask[node(i, j)] != 0; }
  void set_mask(int i, int j, bool m) { mask[node(i, j)] = m ? 1 : 0; }
};

struct ValidationReport {
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

struct ResidualReport {
  double max_norm = 0.0;
  double l2_norm = 0.0;
  double hx = 0.0;
  double ht = 0.0;
  std::optional<double> convergence_order;
  std::optional<cplx> lambda;  // set for per-lambda zero-curvature reports
};

struct GridTooCoarse : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LinearSolveFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PoleAtLambda : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DecayViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StiffnessFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContourThroughZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid sample masked when |det M| < pole_guard * median(|det M|) over the grid.
inline constexpr double kPoleGuard = 1e-8;

}  // namespace hirota
