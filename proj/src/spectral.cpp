#include "qkm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qkm {

namespace {

using Vec = Eigen::VectorXd;

void check_domain(const ModelInput& input, const std::vector<double>& eps, const std::vector<double>& rho) {
  const std::size_t d = input.E.size();
  if (eps.size() != d || rho.size() != d) throw Error(ErrorKind::DomainViolation, "eps/rho length does not match input");
  const double guard = 1e-13 * input.scale();
  for (std::size_t l = 0; l < d; ++l) {
    if (std::abs(rho[l]) <= guard) throw Error(ErrorKind::DomainViolation, "rho_l vanishes");
    for (std::size_t k = 0; k < d; ++k)
      if (std::abs(eps[k] + eps[l]) <= guard) throw Error(ErrorKind::DomainViolation, "eps_k + eps_l vanishes");
  }
}

Vec stack(const Residuals& res) {
  const auto d = static_cast<Eigen::Index>(res.f.size());
  Vec out(2 * d);
  for (Eigen::Index l = 0; l < d; ++l) {
    out(l) = res.f[static_cast<std::size_t>(l)];
    out(d + l) = res.g[static_cast<std::size_t>(l)];
  }
  return out;
}

// d(f, g)/d lambda at fixed (eps, rho).
Vec lambda_partial(const ModelInput& input, const std::vector<double>& eps, const std::vector<double>& rho) {
  const std::size_t d = eps.size();
  Vec out(static_cast<Eigen::Index>(2 * d));
  for (std::size_t l = 0; l < d; ++l) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double den = eps[k] + eps[l];
      s1 += rho[k] / den;
      s2 += rho[k] / (den * den);
    }
    out(static_cast<Eigen::Index>(l)) = -s1 / input.N;
    out(static_cast<Eigen::Index>(d + l)) = s2 / input.N;
  }
  return out;
}

bool in_chamber(const Vec& x) { return (x.array() > 0.0).all() && x.allFinite(); }

struct NewtonOutcome {
  bool converged = false;
  bool left_chamber = false;
  int iterations = 0;
  Vec x;
  double residual = 0.0;
};

NewtonOutcome newton(const ModelInput& base, double lambda, Vec x, const SolveOptions& opts) {
  ModelInput in = base;
  in.lambda = lambda;
  const auto d = static_cast<std::size_t>(base.size());
  const double tol = opts.tol * base.scale();
  NewtonOutcome out;
  std::vector<double> eps(d), rho(d);
  const auto unpack = [&](const Vec& v) {
    for (std::size_t k = 0; k < d; ++k) {
      eps[k] = v(static_cast<Eigen::Index>(k));
      rho[k] = v(static_cast<Eigen::Index>(d + k));
    }
  };
  for (int it = 0; it <= opts.max_newton; ++it) {
    unpack(x);
    const Residuals res = residuals(in, eps, rho);
    out.residual = res.max_abs();
    if (!std::isfinite(out.residual)) break;
    if (out.residual < tol) {
      out.converged = true;
      out.x = x;
      return out;
    }
    if (it == opts.max_newton) break;
    const Vec step = jacobian(in, eps, rho).partialPivLu().solve(-stack(res));
    x += step;
    ++out.iterations;
    if (!in_chamber(x)) {
      out.left_chamber = true;
      return out;
    }
  }
  return out;
}

}  // namespace

ModelInput ModelInput::make(std::vector<double> E, std::vector<double> r, double lambda, std::optional<double> N) {
  ModelInput in;
  in.E = std::move(E);
  in.r = std::move(r);
  in.lambda = lambda;
  in.N = N ? *N : std::accumulate(in.r.begin(), in.r.end(), 0.0);
  return in;
}

double ModelInput::scale() const {
  double s = 1.0;
  for (double e : E) s = std::max(s, e);
  return s;
}

void ModelInput::validate() const {
  if (E.empty()) throw Error(ErrorKind::InvalidInput, "E must be nonempty");
  if (E.size() != r.size()) throw Error(ErrorKind::InvalidInput, "E and r must have equal length");
  for (std::size_t k = 0; k < E.size(); ++k) {
    if (!(E[k] > 0.0) || !std::isfinite(E[k])) throw Error(ErrorKind::InvalidInput, "every E_k must be positive and finite");
    if (!(r[k] > 0.0) || !std::isfinite(r[k])) throw Error(ErrorKind::InvalidInput, "every r_k must be positive and finite");
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(E[k] - E[j]) <= 1e-12 * std::max(E[k], E[j])) {
        std::ostringstream msg;
        msg << "E must be pairwise distinct (E[" << j << "] = E[" << k << "] = " << E[k] << ")";
        throw Error(ErrorKind::InvalidInput, msg.str());
      }
  }
  if (!(N > 0.0) || !std::isfinite(N)) throw Error(ErrorKind::InvalidInput, "N must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidInput, "lambda must be finite and >= 0");
}

RationalR SpectralData::curve(CurveTolerances tol) const {
  return RationalR(eps, rho, input.coupling(), input.scale(), tol);
}

double Residuals::max_abs() const {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  for (double v : g) m = std::max(m, std::abs(v));
  return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
}

Residuals residuals(const ModelInput& input, const std::vector<double>& eps, const std::vector<double>& rho) {
  check_domain(input, eps, rho);
  const std::size_t d = eps.size();
  const double c = input.coupling();
  Residuals res{std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t l = 0; l < d; ++l) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double den = eps[k] + eps[l];
      s1 += rho[k] / den;
      s2 += rho[k] / (den * den);
    }
    res.f[l] = eps[l] - input.E[l] - c * s1;
    res.g[l] = 1.0 - input.r[l] / rho[l] + c * s2;
  }
  return res;
}

Eigen::MatrixXd jacobian(const ModelInput& input, const std::vector<double>& eps, const std::vector<double>& rho) {
  check_domain(input, eps, rho);
  const auto d = static_cast<Eigen::Index>(eps.size());
  const double c = input.coupling();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  for (Eigen::Index l = 0; l < d; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    double s2 = 0.0;
    double s3 = 0.0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const double den = eps[k] + eps[ul];
      s2 += rho[k] / (den * den);
      s3 += rho[k] / (den * den * den);
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double den = eps[uk] + eps[ul];
      const double delta = (k == l) ? 1.0 : 0.0;
      J(l, k) = delta + c * (rho[uk] / (den * den) + delta * s2);
      J(l, d + k) = -c / den;
      J(d + l, k) = -2.0 * c * (rho[uk] / (den * den * den) + delta * s3);
      J(d + l, d + k) = delta * input.r[ul] / (rho[ul] * rho[ul]) + c / (den * den);
    }
  }
  return J;
}

SpectralData solve_spectral(const ModelInput& input, const SolveOptions& opts) {
  input.validate();
  const auto d = static_cast<std::size_t>(input.size());
  SpectralData out{input, input.E, input.r, 0.0, 1.0, 0, 0};
  if (input.lambda == 0.0) return out;

  Vec x(static_cast<Eigen::Index>(2 * d));
  for (std::size_t k = 0; k < d; ++k) {
    x(static_cast<Eigen::Index>(k)) = input.E[k];
    x(static_cast<Eigen::Index>(d + k)) = input.r[k];
  }
  std::vector<double> eps(input.E), rho(input.r);
  const auto unpack = [&](const Vec& v) {
    for (std::size_t k = 0; k < d; ++k) {
      eps[k] = v(static_cast<Eigen::Index>(k));
      rho[k] = v(static_cast<Eigen::Index>(d + k));
    }
  };

  double done = 0.0;
  double step = input.lambda / 8.0;
  const double min_step = opts.min_homotopy_step * input.lambda;
  bool last_failure_was_chamber = false;
  double last_residual = 0.0;
  while (done < input.lambda) {
    const double target = std::min(input.lambda, done + step);
    // Tangent predictor: dx/dlambda = -J^{-1} dF/dlambda.
    ModelInput at = input;
    at.lambda = done;
    unpack(x);
    const Vec tangent = jacobian(at, eps, rho).partialPivLu().solve(-lambda_partial(input, eps, rho));
    Vec guess = x + (target - done) * tangent;
    if (!in_chamber(guess)) guess = x;

    NewtonOutcome r = newton(input, target, guess, opts);
    out.newton_iterations += r.iterations;
    if (r.converged) {
      x = r.x;
      done = target;
      step *= 2.0;
      ++out.homotopy_steps;
      continue;
    }
    last_failure_was_chamber = r.left_chamber;
    last_residual = r.residual;
    step *= 0.5;
    if (step < min_step) {
      std::ostringstream msg;
      msg << "homotopy stalled at lambda = " << done << " of " << input.lambda << " (residual " << last_residual << ")";
      throw Error(last_failure_was_chamber ? ErrorKind::ChamberExit : ErrorKind::Divergence, msg.str());
    }
  }

  // Polish at the target: keep a step only while it lowers the residual.
  unpack(x);
  double res = residuals(input, eps, rho).max_abs();
  for (int polish = 0; polish < 3; ++polish) {
    const Vec trial = x + jacobian(input, eps, rho).partialPivLu().solve(-stack(residuals(input, eps, rho)));
    unpack(trial);
    const double trial_res = residuals(input, eps, rho).max_abs();
    if (!in_chamber(trial) || !(trial_res < res)) {
      unpack(x);
      break;
    }
    x = trial;
    res = trial_res;
    ++out.newton_iterations;
  }
  out.eps = eps;
  out.rho = rho;
  out.residual_max = res;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian(input, eps, rho));
  const auto& sv = svd.singularValues();
  out.jacobian_condition = sv(0) / sv(sv.size() - 1);
  return out;
}

SpectralJets series_spectral(const ModelInput& input, int K) {
  input.validate();
  if (K < 0 || K > 12) throw Error(ErrorKind::InvalidInput, "series order must lie in [0, 12]");
  const std::size_t d = static_cast<std::size_t>(input.size());
  SpectralJets jets;
  for (std::size_t k = 0; k < d; ++k) {
    jets.eps.emplace_back(K, input.E[k]);
    jets.rho.emplace_back(K, input.r[k]);
  }
  const SeriesJet c = SeriesJet::linear(K, 0.0, 1.0 / input.N);
  ModelInput at_zero = input;
  at_zero.lambda = 0.0;
  const auto lu = jacobian(at_zero, input.E, input.r).partialPivLu();

  for (int m = 1; m <= K; ++m) {
    Vec rhs(static_cast<Eigen::Index>(2 * d));
    for (std::size_t l = 0; l < d; ++l) {
      SeriesJet s1(K), s2(K);
      for (std::size_t k = 0; k < d; ++k) {
        const SeriesJet inv = (jets.eps[k] + jets.eps[l]).reciprocal();
        s1 += jets.rho[k] * inv;
        s2 += jets.rho[k] * inv * inv;
      }
      const SeriesJet f = jets.eps[l] - SeriesJet(K, input.E[l]) - c * s1;
      const SeriesJet g = SeriesJet(K, 1.0) - input.r[l] * jets.rho[l].reciprocal() + c * s2;
      rhs(static_cast<Eigen::Index>(l)) = -f[m].real();
      rhs(static_cast<Eigen::Index>(d + l)) = -g[m].real();
    }
    const Vec delta = lu.solve(rhs);
    for (std::size_t l = 0; l < d; ++l) {
      jets.eps[l][m] = delta(static_cast<Eigen::Index>(l));
      jets.rho[l][m] = delta(static_cast<Eigen::Index>(d + l));
    }
  }
  return jets;
}

double bezout_bound(int d) { return std::pow(d + 1.0, d) * std::pow(2.0 * d + 1.0, d); }

}  // namespace qkm
