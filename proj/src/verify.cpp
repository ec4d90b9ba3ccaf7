#include "qkm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qkm/spectral.hpp"

namespace qkm {

namespace {

cplx G(const SpectralCurve& C, cplx z, cplx w) { return G0_pair(C, z, w, PairFormula::symm).value; }

cplx G11(const SpectralCurve& C, cplx z, cplx w) { return G0_oneone(C, z, w, OneOneFormula::symm).value; }

// d/dzeta G(R^{-1} zeta, w) by the 5-point central stencil.
cplx dG_dzeta(const SpectralCurve& C, cplx zeta, cplx w) {
  const double h = 1e-5 * C.R().scale();
  const auto f = [&](double s) { return G(C, principal_inverse(C, zeta + s), w); };
  return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
}

double min_E_gap(const SpectralCurve& C) {
  const auto& E = C.data().input.E;
  double gap = *std::min_element(E.begin(), E.end());
  for (std::size_t i = 0; i < E.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) gap = std::min(gap, std::abs(E[i] - E[j]));
  return gap;
}

bool skippable(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::SingularPoint:
    case ErrorKind::PoleHit:
    case ErrorKind::DegenerateFiber:
    case ErrorKind::BaseNotFound:
      return true;
    default:
      return false;
  }
}

// Draws points until `count` samples evaluated; singular draws are replaced.
template <class Draw, class Eval>
void sample(ResidualReport& rep, int count, Draw draw, Eval eval) {
  const int max_attempts = 20 * std::max(count, 1);
  for (int attempt = 0; attempt < max_attempts && rep.sample_count < count; ++attempt) {
    std::vector<cplx> pt = draw();
    try {
      rep.add(eval(pt), pt);
    } catch (const Error& e) {
      if (!skippable(e)) throw;
    }
  }
}

using TSeries = std::vector<double>;  // coefficients in t

}  // namespace

Sampler::Sampler(std::uint64_t seed) : rng_(seed) {}

double Sampler::uniform(double lo, double hi) {
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

cplx Sampler::regular(const SpectralCurve& C) {
  const double s = C.R().scale();
  return {uniform(0.2, 2.0 * s), uniform(-s, s)};
}

cplx Sampler::near_E(const SpectralCurve& C, int a) {
  const double radius = 0.2 * min_E_gap(C);
  const double rad = radius * std::sqrt(uniform(0.0, 1.0));
  const double phi = uniform(0.0, 2.0 * 3.141592653589793);
  return C.data().input.E[static_cast<std::size_t>(a)] + std::polar(rad, phi);
}

cplx principal_inverse(const SpectralCurve& C, cplx zeta) {
  if (C.is_free()) return zeta;
  const std::vector<cplx> roots = preimages(C.R(), zeta);
  const cplx best = *std::max_element(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  if (!(best.real() > 0.0))
    throw Error(ErrorKind::BranchInversionFailure, "no preimage of the point lies in the right half-plane");
  return best;
}

double residual_GZW(const SpectralCurve& C, cplx zeta, cplx eta) {
  const auto& in = C.data().input;
  const auto& eps = C.R().eps();
  const double c = C.coupling();
  const cplx z = principal_inverse(C, zeta);
  const cplx w = principal_inverse(C, eta);
  const cplx gzw = G(C, z, w);
  cplx S = 0.0;
  cplx T = 0.0;
  for (int k = 0; k < C.size(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    S += in.r[uk] * G(C, z, eps[uk]);
    const cplx gap = in.E[uk] - zeta;
    const cplx q = (std::abs(gap) < 1e-5 * C.R().scale()) ? dG_dzeta(C, 0.5 * (in.E[uk] + zeta), w)
                                                            : (G(C, eps[uk], w) - gzw) / gap;
    T += in.r[uk] * q;
  }
  const cplx lhs = (zeta + eta + c * S) * gzw;
  return relative_residual(lhs, 1.0 + c * T);
}

ResidualReport residual_2pt(const SpectralCurve& C) {
  const auto& in = C.data().input;
  const auto& eps = C.R().eps();
  const Eigen::MatrixXd& Gm = C.G_matrix();
  const double c = C.coupling();
  const int d = C.size();
  ResidualReport rep{"2pt", 0.0, 0, {}};
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    double S = 0.0;
    for (int k = 0; k < d; ++k) S += in.r[static_cast<std::size_t>(k)] * Gm(a, k);
    for (int b = 0; b < d; ++b) {
      const auto ub = static_cast<std::size_t>(b);
      cplx T = 0.0;
      for (int k = 0; k < d; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (k != a) T += in.r[uk] * (Gm(k, b) - Gm(a, b)) / (in.E[uk] - in.E[ua]);
      }
      if (!C.is_free()) T += in.r[ua] * dG_dzeta(C, in.E[ua], eps[ub]);
      const double lhs = (in.E[ua] + in.E[ub] + c * S) * Gm(a, b);
      rep.add(relative_residual(lhs, 1.0 + c * T), {in.E[ua], in.E[ub]});
    }
  }
  return rep;
}

double residual_ansatz_vii(const SpectralCurve& C, cplx z) {
  const RationalR& R = C.R();
  const double c = C.coupling();
  cplx lhs = R(z);
  for (int k = 0; k < C.size(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double ek = R.eps()[uk];
    lhs += c * C.r()[uk] * (G(C, z, ek) + 1.0 / R.difference(ek, z));
  }
  return relative_residual(lhs, -R(-z));
}

double residual_fractions(const SpectralCurve& C, cplx w) {
  const RationalR& R = C.R();
  const PreimageFan fan = fibre(R, w);
  cplx lhs = 1.0 / R.difference(w, -w);
  for (cplx h : fan.hats) lhs += 1.0 / R.difference(w, -h);
  cplx rhs = 0.5 / R.difference(w, 0.0);
  for (double a : C.alpha()) rhs += 1.0 / R.difference(w, a);
  return relative_residual(lhs, rhs);
}

double residual_G11_functional(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const double c = C.coupling();
  cplx lhs = R.difference(z, -z) * G11(C, z, w);
  for (int k = 0; k < C.size(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double ek = R.eps()[uk];
    lhs -= c * C.r()[uk] * G11(C, ek, w) / R.difference(ek, z);
  }
  const cplx rhs = C.is_free() ? cplx(0.0) : C.lambda() * (G(C, z, w) - G(C, w, w)) / R.difference(z, w);
  return relative_residual(lhs, rhs);
}

double residual_G11_alpha(const SpectralCurve& C, cplx w) {
  const RationalR& R = C.R();
  const double c = C.coupling();
  const int d = C.size();
  std::vector<cplx> g11(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) g11[static_cast<std::size_t>(l)] = G11(C, R.eps()[static_cast<std::size_t>(l)], w);
  const cplx gww = G(C, w, w);
  double worst = 0.0;
  for (double a : C.alpha()) {
    cplx lhs = 0.0;
    for (int l = 0; l < d; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      lhs += c * C.r()[ul] * g11[ul] / R.difference(a, R.eps()[ul]);
    }
    const cplx rhs = C.is_free() ? cplx(0.0) : C.lambda() * (G(C, a, w) - gww) / R.difference(a, w);
    worst = std::max(worst, relative_residual(lhs, rhs));
  }
  return worst;
}

double residual_eps_hat(const SpectralCurve& C, cplx w) {
  const RationalR& R = C.R();
  const PreimageFan fan = fibre(R, w);
  const int d = C.size();
  double worst = 0.0;
  for (int k = 0; k < d; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double ek = R.eps()[uk];
    std::vector<cplx> num, den;
    for (cplx h : fan.hats) num.push_back(R.difference(ek, -h));
    for (int j = 0; j < d; ++j)
      if (j != k) den.push_back(R.difference(ek, R.eps()[static_cast<std::size_t>(j)]));
    const cplx lhs = C.coupling() * C.r()[uk] * G(C, ek, w);
    worst = std::max(worst, relative_residual(lhs, -balanced_product(num) / balanced_product(den)));
  }
  return worst;
}

double residual_identity(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const PreimageFan fan = fibre(R, w);
  const int d = C.size();
  const auto& eps = R.eps();
  std::vector<cplx> first;
  for (int j = 0; j < d; ++j)
    first.push_back(R.difference(z, -fan.hats[static_cast<std::size_t>(j)]) / R.difference(z, eps[static_cast<std::size_t>(j)]));
  cplx lhs = balanced_product(first);
  for (int k = 0; k < d; ++k) {
    const double ek = eps[static_cast<std::size_t>(k)];
    std::vector<cplx> f;
    for (cplx h : fan.hats) f.push_back(R.difference(ek, -h));
    for (int j = 0; j < d; ++j)
      if (j != k) f.push_back(1.0 / R.difference(ek, eps[static_cast<std::size_t>(j)]));
    lhs += balanced_product(f) / R.difference(ek, z);
  }
  return relative_residual(lhs, 1.0);
}

JetMatrix series_2pt_iterative(const ModelInput& input, int K) {
  input.validate();
  if (K < 0 || K > 8) throw Error(ErrorKind::InvalidInput, "series order must lie in [0, 8]");
  const std::size_t d = static_cast<std::size_t>(input.size());
  const auto& E = input.E;
  const auto& r = input.r;
  const auto U = static_cast<std::size_t>(K);
  // g[a][b][m][p]: coefficient of lambda^m t^p in G(E_a + t, E_b), p <= K - m.
  std::vector<std::vector<std::vector<TSeries>>> g(d, std::vector<std::vector<TSeries>>(d, std::vector<TSeries>(U + 1)));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      TSeries& s = g[a][b][0];
      s.resize(U + 1);
      const double base = E[a] + E[b];
      double pw = 1.0 / base;
      for (std::size_t p = 0; p <= U; ++p, pw /= -base) s[p] = pw;
    }

  for (std::size_t m = 1; m <= U; ++m) {
    const std::size_t P = U - m;
    for (std::size_t a = 0; a < d; ++a) {
      // S_a^{(i)}(t) = sum_k r_k g[a][k][i](t)
      std::vector<TSeries> S(m, TSeries(P + 1, 0.0));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < d; ++k)
          for (std::size_t p = 0; p <= P; ++p) S[i][p] += r[k] * g[a][k][i][p];

      for (std::size_t b = 0; b < d; ++b) {
        TSeries rhs(P + 1, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          const TSeries& gb = g[a][b][m - 1 - i];
          for (std::size_t p = 0; p <= P; ++p)
            for (std::size_t q = 0; q <= p; ++q) rhs[p] -= S[i][q] * gb[p - q];
        }
        const TSeries& prev = g[a][b][m - 1];
        for (std::size_t k = 0; k < d; ++k) {
          if (k == a) {
            for (std::size_t p = 0; p <= P; ++p) rhs[p] += r[k] * prev[p + 1];
            continue;
          }
          // (G(E_k, E_b) - G(E_a + t, E_b)) / (E_k - E_a - t)
          const double gap = E[k] - E[a];
          TSeries diff(P + 1);
          for (std::size_t p = 0; p <= P; ++p) diff[p] = -prev[p];
          diff[0] += g[k][b][m - 1][0];
          for (std::size_t p = 0; p <= P; ++p) {
            double geom = 1.0 / gap;
            double acc = 0.0;
            for (std::size_t q = 0; q <= p; ++q, geom /= gap) acc += diff[p - q] * geom;
            rhs[p] += r[k] * acc;
          }
        }
        TSeries& out = g[a][b][m];
        out.assign(P + 1, 0.0);
        const double base = E[a] + E[b];
        for (std::size_t p = 0; p <= P; ++p) out[p] = (rhs[p] / input.N - (p > 0 ? out[p - 1] : 0.0)) / base;
      }
    }
  }

  JetMatrix jets(d, std::vector<SeriesJet>(d, SeriesJet(K)));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t m = 0; m <= U; ++m) jets[a][b][static_cast<int>(m)] = g[a][b][m][0];
  return jets;
}

JetMatrix series_2pt_closed(const ModelInput& input, int K) {
  const SpectralJets sj = series_spectral(input, K);
  const std::size_t d = static_cast<std::size_t>(input.size());
  const SeriesJet c = SeriesJet::linear(K, 0.0, 1.0 / input.N);
  const auto& E = input.E;

  // Hats of the fibre through eps_k: hat_k^j = -eps_j + c eta_kj.
  std::vector<std::vector<SeriesJet>> eta(d, std::vector<SeriesJet>(d, SeriesJet(K)));
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t j = 0; j < d; ++j) {
      SeriesJet e(K);
      for (int it = 0; it <= K; ++it) {
        SeriesJet den = -sj.eps[j] - SeriesJet(K, E[k]) + c * e;
        for (std::size_t i = 0; i < d; ++i)
          if (i != j) den -= c * sj.rho[i] / (sj.eps[i] - sj.eps[j] + c * e);
        e = sj.rho[j] / den;
      }
      eta[k][j] = e;
    }

  std::vector<SeriesJet> side(d, SeriesJet(K, 1.0));
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < d; ++j)
      if (j != k) side[k] *= (sj.eps[k] - sj.eps[j]) * (1.0 / (E[k] - E[j]));
    side[k] *= sj.rho[k] * (1.0 / input.r[k]);
  }

  JetMatrix out(d, std::vector<SeriesJet>(d, SeriesJet(K)));
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) {
      SeriesJet v = side[k] * side[l] / (sj.eps[k] + sj.eps[l]);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t m = 0; m < d; ++m) v *= SeriesJet(K, 1.0) - c * (eta[k][j] + eta[l][m]) / (sj.eps[j] + sj.eps[m]);
      out[k][l] = v;
    }
  return out;
}

ResidualReport compare_series(const ModelInput& input, int K, const SeriesCorruption& corrupt) {
  const JetMatrix oracle = series_2pt_iterative(input, K);
  JetMatrix closed = series_2pt_closed(input, K);
  if (corrupt.delta != 0.0) closed[static_cast<std::size_t>(corrupt.k)][static_cast<std::size_t>(corrupt.l)][corrupt.order] += corrupt.delta;
  ResidualReport rep{"series_compare", 0.0, 0, {}};
  const int d = input.size();
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m <= K; ++m) {
        const cplx o = oracle[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)][m];
        const cplx c = closed[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)][m];
        rep.add(relative_residual(o, c), {cplx(k), cplx(l), cplx(m)});
      }
  return rep;
}

std::vector<ResidualReport> residual_suite(const SpectralCurve& C, const SuiteOptions& opts) {
  Sampler rng(opts.seed);
  const int d = C.size();
  const int n = opts.samples;
  std::vector<ResidualReport> out;

  ResidualReport gzw{"GZW", 0.0, 0, {}};
  sample(
      gzw, n,
      [&] {
        const int a = static_cast<int>(rng.uniform(0.0, d)) % d;
        const int b = static_cast<int>(rng.uniform(0.0, d)) % d;
        return std::vector<cplx>{rng.near_E(C, a), rng.near_E(C, b)};
      },
      [&](const std::vector<cplx>& p) { return residual_GZW(C, p[0], p[1]); });
  out.push_back(gzw);

  out.push_back(residual_2pt(C));

  const auto one = [&] { return std::vector<cplx>{rng.regular(C)}; };
  const auto two = [&] { return std::vector<cplx>{rng.regular(C), rng.regular(C)}; };

  ResidualReport vii{"ansatz_vii", 0.0, 0, {}};
  sample(vii, n, one, [&](const std::vector<cplx>& p) { return residual_ansatz_vii(C, p[0]); });
  out.push_back(vii);

  ResidualReport frac{"fractions", 0.0, 0, {}};
  sample(frac, n, one, [&](const std::vector<cplx>& p) { return residual_fractions(C, p[0]); });
  out.push_back(frac);

  ResidualReport fac{"factorization", 0.0, 0, {}};
  sample(fac, n, two, [&](const std::vector<cplx>& p) { return check_factorization(C.R(), p[0], p[1]); });
  out.push_back(fac);

  ResidualReport ident{"identity", 0.0, 0, {}};
  sample(ident, n, two, [&](const std::vector<cplx>& p) { return residual_identity(C, p[0], p[1]); });
  out.push_back(ident);

  ResidualReport eh{"eps_hat", 0.0, 0, {}};
  sample(eh, n, one, [&](const std::vector<cplx>& p) { return residual_eps_hat(C, p[0]); });
  out.push_back(eh);

  ResidualReport g11{"G11_functional", 0.0, 0, {}};
  sample(g11, n, two, [&](const std::vector<cplx>& p) { return residual_G11_functional(C, p[0], p[1]); });
  out.push_back(g11);

  ResidualReport g11a{"G11_alpha", 0.0, 0, {}};
  sample(g11a, n, one, [&](const std::vector<cplx>& p) { return residual_G11_alpha(C, p[0]); });
  out.push_back(g11a);

  return out;
}

}  // namespace qkm
