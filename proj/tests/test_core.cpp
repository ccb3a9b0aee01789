#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "hirota/core.hpp"

using namespace hirota;
using testutil::make_spec;

TEST_CASE("theta closed-form values") {
  CHECK(std::abs(theta({0.7, 1.3}, 0.4, 0.0, 0.0)) == 0.0);
  CHECK(std::abs(theta(I, 0.0, 1.0, 0.0) - cplx{-0.5, 0.0}) < 1e-15);
  CHECK(std::abs(theta(I, 0.0, 0.0, 1.0) - cplx{0.0, 0.5}) < 1e-15);
}

TEST_CASE("theta is linear in x and t separately") {
  const cplx lam{0.4, 0.7};
  for (double eps : {0.0, 0.3}) {
    const cplx a = theta(lam, eps, 1.3, 0.8);
    const cplx b = theta(lam, eps, -2.1, 0.0);
    CHECK(std::abs(theta(lam, eps, 1.3 - 2.1, 0.8) - (a + b)) < 1e-14);
  }
}

TEST_CASE("theta at lambda* is minus the conjugate of theta for real inputs") {
  // theta = (i/2)[lambda x - (lambda^2 + eps lambda^3) t] has real
  // coefficients under the i, so conj(theta(lambda)) = -theta(conj(lambda)).
  const cplx lam{-0.6, 0.9};
  const cplx th = theta(lam, 0.25, 1.7, -0.4);
  const cplx thc = theta(std::conj(lam), 0.25, 1.7, -0.4);
  CHECK(std::abs(thc + std::conj(th)) <= 1e-14 * std::abs(th));
}

TEST_CASE("dressing vectors at the origin") {
  SpectralPoint p{I, {cplx{1.0, 0.0}, cplx{0.0, 0.0}}};
  const auto dv = dressing_vectors(p, SignConvention::AsPrinted, 0.0, 0.0, 0.0);
  CHECK(std::abs(dv.v(0) - cplx{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(dv.v(1) - cplx{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(dv.v(2)) < 1e-15);
  CHECK(std::abs(dv.vhat(0) - cplx{-1.0, 0.0}) < 1e-15);
  CHECK(std::abs(dv.vhat(1) - cplx{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(dv.vhat(2)) < 1e-15);
}

TEST_CASE("dressing vectors pick up e^{theta sigma3}") {
  SpectralPoint p{I, {cplx{1.0, 0.0}, cplx{0.0, 0.0}}};
  const auto dv = dressing_vectors(p, SignConvention::AsPrinted, 0.0, 2.0, 0.0);
  CHECK(std::abs(dv.v(0) - std::exp(cplx{1.0, 0.0})) < 1e-14);
  CHECK(std::abs(dv.v(1) - std::exp(cplx{-1.0, 0.0})) < 1e-15);
  CHECK(std::abs(dv.v(2)) < 1e-15);
}

TEST_CASE("vhat v equals (lambda* - lambda) M_jj") {
  for (auto conv : {SignConvention::AsPrinted, SignConvention::Regularized}) {
    const auto spec = testutil::random_spec(conv, 2, 2, 7u, 0.2);
    for (double x : {-1.4, 0.3, 2.2})
      for (double t : {-0.5, 0.0, 0.9}) {
        const auto M = build_M(spec, x, t);
        for (int j = 0; j < 2; ++j) {
          const auto dv = dressing_vectors(spec.points[j], conv,
                                           spec.params.epsilon, x, t);
          const cplx lhs = (dv.vhat * dv.v).value();
          const cplx rhs =
              (std::conj(spec.points[j].lambda) - spec.points[j].lambda) * M.M(j, j);
          CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(rhs)));
        }
      }
  }
}

TEST_CASE("dressing vectors satisfy the x and t linear ODEs at order 2") {
  SpectralPoint p{{0.3, 0.7}, {cplx{1.0, 0.4}, cplx{-0.2, 0.6}}};
  const double eps = 0.15;
  const Mat s3 = sigma3(2);
  auto v_at = [&](double x, double t) {
    return dressing_vectors(p, SignConvention::AsPrinted, eps, x, t).v;
  };
  const double x0 = 0.4, t0 = -0.3;
  double errs[2][2];  // [axis][level]
  for (int lev = 0; lev < 2; ++lev) {
    const double h = 1e-2 / (1 << lev);
    const Vec dx = (v_at(x0 + h, t0) - v_at(x0 - h, t0)) / (2.0 * h);
    const Vec dt = (v_at(x0, t0 + h) - v_at(x0, t0 - h)) / (2.0 * h);
    const cplx om = p.lambda * p.lambda + eps * p.lambda * p.lambda * p.lambda;
    const Vec rx = dx - 0.5 * I * p.lambda * (s3 * v_at(x0, t0));
    const Vec rt = dt + 0.5 * I * om * (s3 * v_at(x0, t0));
    errs[0][lev] = rx.cwiseAbs().maxCoeff();
    errs[1][lev] = rt.cwiseAbs().maxCoeff();
  }
  for (int axis = 0; axis < 2; ++axis) {
    CHECK(errs[axis][1] < errs[axis][0]);
    CHECK(std::log2(errs[axis][0] / errs[axis][1]) > 1.8);
  }
}

TEST_CASE("dressing vectors flag exponent overflow") {
  SpectralPoint p{{0.0, 1.0}, {cplx{1.0, 0.0}, cplx{0.0, 0.0}}};
  CHECK_THROWS_AS(dressing_vectors(p, SignConvention::AsPrinted, 0.0, 2000.0, 0.0),
                  std::range_error);
}

TEST_CASE("validate_spec accepts a good spec") {
  const auto s = make_spec(SignConvention::AsPrinted, 0.0, 2,
                           {{I, {cplx{1.0, 0.0}, cplx{0.0, 0.0}}}});
  CHECK(validate_spec(s).ok());
}

TEST_CASE("validate_spec rejects lower half-plane points") {
  const auto s = make_spec(SignConvention::AsPrinted, 0.0, 2,
                           {{-I, {cplx{1.0, 0.0}, cplx{0.0, 0.0}}}});
  const auto r = validate_spec(s);
  REQUIRE_FALSE(r.ok());
  CHECK(r.errors.front().find("upper half-plane") != std::string::npos);
}

TEST_CASE("validate_spec rejects duplicate lambdas") {
  const auto s = make_spec(SignConvention::AsPrinted, 0.0, 2,
                           {{I, {cplx{1.0, 0.0}, cplx{0.0, 0.0}}},
                            {I, {cplx{0.5, 0.0}, cplx{0.2, 0.0}}}});
  CHECK_FALSE(validate_spec(s).ok());
}

TEST_CASE("validate_spec rejects all-zero norm constants and count mismatch") {
  auto s = make_spec(SignConvention::AsPrinted, 0.0, 2,
                     {{I, {cplx{0.0, 0.0}, cplx{0.0, 0.0}}}});
  CHECK_FALSE(validate_spec(s).ok());
  s.points[0].norm = {cplx{1.0, 0.0}};  // c = 2 but one constant
  CHECK_FALSE(validate_spec(s).ok());
  s.points.clear();
  CHECK_FALSE(validate_spec(s).ok());
}
