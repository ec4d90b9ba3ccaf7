#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "qkm/spectral.hpp"

using namespace qkm;

namespace {

// Closed form of the d = 1, E = r = N = 1 system.
double eps_d1(double lambda) { return (2.0 + std::sqrt(1.0 + 3.0 * lambda)) / 3.0; }
double rho_d1(double lambda) { return 2.0 * eps_d1(lambda) * (eps_d1(lambda) - 1.0) / lambda; }

}  // namespace

TEST_CASE("residuals at the reference point") {
  const ModelInput free = ModelInput::make({1.0, 2.5}, {2.0, 1.0}, 0.0);
  const Residuals r0 = residuals(free, free.E, free.r);
  CHECK(r0.max_abs() == 0.0);

  const ModelInput in = ModelInput::make({1.0, 2.5}, {2.0, 1.0}, 0.3);
  const Residuals r = residuals(in, in.E, in.r);
  for (int l = 0; l < 2; ++l) {
    double s = 0.0;
    for (int k = 0; k < 2; ++k) s += in.r[k] / (in.E[k] + in.E[l]);
    CHECK(r.f[l] == doctest::Approx(-in.coupling() * s));
  }
}

TEST_CASE("jacobian against finite differences") {
  testing::Rng rng(2);
  for (int inst = 0; inst < 10; ++inst) {
    const ModelInput in = testing::random_instance(rng, 1 + inst % 5, 0.5);
    const int d = in.size();
    std::vector<double> eps = in.E, rho = in.r;
    for (auto& e : eps) e *= 1.1;
    const Eigen::MatrixXd J = jacobian(in, eps, rho);
    const double h = 1e-6;
    for (int j = 0; j < 2 * d; ++j) {
      auto ep = eps, em = eps, rp = rho, rm = rho;
      if (j < d) {
        ep[j] += h;
        em[j] -= h;
      } else {
        rp[j - d] += h;
        rm[j - d] -= h;
      }
      const Residuals a = residuals(in, ep, rp), b = residuals(in, em, rm);
      for (int i = 0; i < d; ++i) {
        CHECK(std::abs(J(i, j) - (a.f[i] - b.f[i]) / (2 * h)) < 1e-6);
        CHECK(std::abs(J(d + i, j) - (a.g[i] - b.g[i]) / (2 * h)) < 1e-6);
      }
    }
  }
}

TEST_CASE("jacobian blocks") {
  const ModelInput free = ModelInput::make({1.0, 2.0}, {2.0, 3.0}, 0.0);
  const Eigen::MatrixXd J0 = jacobian(free, free.E, free.r);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
  expect(0, 0) = expect(1, 1) = 1.0;
  expect(2, 2) = 1.0 / 2.0;
  expect(3, 3) = 1.0 / 3.0;
  CHECK((J0 - expect).norm() == 0.0);

  // d = 1 by hand: f = e - E - c rho/(2e), g = 1 - r/rho + c rho/(4e^2)
  const ModelInput in = ModelInput::make({1.0}, {1.0}, 0.4);
  const double e = 1.2, p = 0.9, c = 0.4;
  const Eigen::MatrixXd J = jacobian(in, {e}, {p});
  CHECK(J(0, 0) == doctest::Approx(1.0 + c * p / (2 * e * e)));
  CHECK(J(0, 1) == doctest::Approx(-c / (2 * e)));
  CHECK(J(1, 0) == doctest::Approx(-c * p / (2 * e * e * e)));
  CHECK(J(1, 1) == doctest::Approx(1.0 / (p * p) + c / (4 * e * e)));
}

TEST_CASE("d = 1 closed form") {
  for (double lambda : {0.01, 0.1, 0.2, 1.0, 10.0}) {
    const SpectralData S = solve_spectral(ModelInput::make({1.0}, {1.0}, lambda));
    CHECK(std::abs(S.eps[0] - eps_d1(lambda)) < 1e-13);
    CHECK(std::abs(S.rho[0] - rho_d1(lambda)) < 1e-12);
  }
  const SpectralData S = solve_spectral(ModelInput::make({1.0}, {1.0}, 0.1));
  CHECK(std::abs(S.eps[0] - 1.05) < 5e-3);
  CHECK(std::abs(S.rho[0] - 0.975) < 5e-3);
}

TEST_CASE("lambda = 0 is exact") {
  const ModelInput in = ModelInput::make({1.5, 0.7}, {1.0, 2.0}, 0.0);
  const SpectralData S = solve_spectral(in);
  CHECK(S.eps == in.E);
  CHECK(S.rho == in.r);
  CHECK(S.newton_iterations == 0);
}

TEST_CASE("random corpus converges in the positive chamber") {
  for (const ModelInput& in : testing::corpus(100, 6, 17)) {
    const SpectralData S = solve_spectral(in);
    CHECK(S.residual_max < 1e-12 * in.scale());
    for (int k = 0; k < in.size(); ++k) {
      CHECK(S.eps[k] > 0.0);
      CHECK(S.rho[k] > 0.0);
    }
    CHECK(std::isfinite(S.jacobian_condition));
  }
}

TEST_CASE("first-order slopes and monotone deformation") {
  testing::Rng rng(4);
  for (int inst = 0; inst < 20; ++inst) {
    const ModelInput in = testing::random_instance(rng, 1 + inst % 6);
    const SpectralJets j = series_spectral(in, 2);
    for (int l = 0; l < in.size(); ++l) {
      double s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < in.size(); ++k) {
        s1 += in.r[k] / (in.E[k] + in.E[l]);
        s2 += in.r[k] / ((in.E[k] + in.E[l]) * (in.E[k] + in.E[l]));
      }
      CHECK(j.eps[l][0].real() == in.E[l]);
      CHECK(j.rho[l][0].real() == in.r[l]);
      CHECK(j.eps[l][1].real() == doctest::Approx(s1 / in.N).epsilon(1e-12));
      CHECK(j.rho[l][1].real() == doctest::Approx(-in.r[l] * s2 / in.N).epsilon(1e-12));
      CHECK(j.eps[l][1].real() > 0.0);
      CHECK(j.rho[l][1].real() < 0.0);
    }
  }
  const SpectralJets j1 = series_spectral(ModelInput::make({1.0}, {1.0}, 0.1), 1);
  CHECK(j1.eps[0][1].real() == doctest::Approx(0.5));
  CHECK(j1.rho[0][1].real() == doctest::Approx(-0.25));
}

TEST_CASE("series jets against the d = 1 closed form") {
  // Taylor coefficients of eps(lambda) = (2 + sqrt(1 + 3 lambda)) / 3
  const SpectralJets j = series_spectral(ModelInput::make({1.0}, {1.0}, 0.1), 6);
  double binom = 1.0;  // C(1/2, m)
  for (int m = 0; m <= 6; ++m) {
    const double coeff = (m == 0 ? 1.0 : binom * std::pow(3.0, m) / 3.0);
    if (m > 0) CHECK(j.eps[0][m].real() == doctest::Approx(coeff).epsilon(1e-12));
    binom *= (0.5 - m) / (m + 1);
  }
}

TEST_CASE("Taylor remainder of the jets") {
  const int K = 3;
  testing::Rng rng(8);
  for (int inst = 0; inst < 5; ++inst) {
    const ModelInput base = testing::random_instance(rng, 1 + inst % 3);
    const SpectralJets j = series_spectral(base, K);
    std::vector<double> err;
    for (double lambda : {1e-3, 2e-3, 4e-3}) {
      ModelInput in = base;
      in.lambda = lambda;
      const SpectralData S = solve_spectral(in, {1e-15, 50, 1e-6});
      double e = 0.0;
      for (int k = 0; k < in.size(); ++k) e = std::max(e, std::abs(S.eps[k] - j.eps[k].evaluate(lambda).real()));
      err.push_back(e);
    }
    // slope on the log-log scale; skip when the error already sits at roundoff
    if (err[2] > 1e-14) CHECK(std::log2(err[2] / err[1]) >= K + 0.5);
  }
}

TEST_CASE("invalid input") {
  for (const ModelInput& bad :
       {ModelInput::make({1.0, 1.0}, {1.0, 1.0}, 0.1), ModelInput::make({1.0}, {-1.0}, 0.1),
        ModelInput::make({1.0}, {1.0}, -0.1), ModelInput::make({0.0}, {1.0}, 0.1), ModelInput::make({}, {}, 0.1)}) {
    try {
      solve_spectral(bad);
      FAIL("expected InvalidInput");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidInput);
    }
  }
}

TEST_CASE("homotopy failure kinds") {
  const ModelInput in = ModelInput::make({1.0, 2.0}, {1.0, 1.0}, 100.0);
  try {
    solve_spectral(in, {1e-12, 2, 0.1});
    FAIL("expected a solver failure");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::ChamberExit || e.kind() == ErrorKind::Divergence));
  }
}

TEST_CASE("bezout bound") {
  CHECK(bezout_bound(1) == 6.0);
  CHECK(bezout_bound(2) == 225.0);
}
