#include "qkm/correlators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "qkm/cauchy.hpp"

namespace qkm {

namespace {

cplx guarded(cplx den, double guard, const char* what) {
  if (!(std::abs(den) > guard)) {
    std::ostringstream msg;
    msg << what << " vanishes (|" << den << "| <= " << guard << ")";
    throw Error(ErrorKind::SingularPoint, msg.str());
  }
  return den;
}

// Runs a formula and reports poles of R as SingularPoint.
cplx evaluate(const std::function<cplx()>& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::PoleHit) throw Error(ErrorKind::SingularPoint, e.what());
    throw;
  }
}

Eigen::MatrixXd compute_G_matrix(const RationalR& R, const std::vector<PreimageFan>& fans) {
  const int d = R.size();
  const auto& eps = R.eps();
  Eigen::MatrixXd G(d, d);
  // prod_{j != k} (eps_k - eps_j) / (R(eps_k) - R(eps_j)) / R'(eps_k)
  std::vector<cplx> side(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    std::vector<cplx> f;
    for (int j = 0; j < d; ++j)
      if (j != k) f.push_back((eps[k] - eps[j]) / (R(eps[k]) - R(eps[j])));
    side[static_cast<std::size_t>(k)] = balanced_product(f) / R.derivative(eps[k]);
  }
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l <= k; ++l) {
      std::vector<cplx> f;
      for (int j = 0; j < d; ++j)
        for (int m = 0; m < d; ++m)
          f.push_back((-fans[static_cast<std::size_t>(k)].hats[static_cast<std::size_t>(j)] -
                       fans[static_cast<std::size_t>(l)].hats[static_cast<std::size_t>(m)]) /
                      (eps[j] + eps[m]));
      const cplx v = balanced_product(f) * side[static_cast<std::size_t>(k)] * side[static_cast<std::size_t>(l)] /
                     (eps[k] + eps[l]);
      G(k, l) = v.real();
      G(l, k) = v.real();
    }
  }
  return G;
}

double spread_of(const std::vector<FormulaValue>& vals) {
  double s = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double scale = std::max({std::abs(vals[i].value), std::abs(vals[j].value), 1e-300});
      s = std::max(s, std::abs(vals[i].value - vals[j].value) / scale);
    }
  return s;
}

CorrelatorValue collect(std::vector<FormulaValue> vals, const std::string& tag) {
  CorrelatorValue out{vals.front().value, tag, spread_of(vals), std::move(vals)};
  return out;
}

// ---- two-point formulas ----------------------------------------------------

cplx pair_zhatw(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const double g = C.singular_guard();
  const PreimageFan fw = fibre(R, w);
  const cplx den = guarded(R.difference(w, -z), g, "R(w) - R(-z)");
  std::vector<cplx> f;
  for (int j = 0; j < C.size(); ++j)
    f.push_back(R.difference(z, -fw.hats[static_cast<std::size_t>(j)]) /
                guarded(R.difference(z, R.eps()[static_cast<std::size_t>(j)]), g, "R(z) - R(eps_j)"));
  return balanced_product(f) / den;
}

cplx pair_symm(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const double g = C.singular_guard();
  const PreimageFan fz = fibre(R, z);
  const PreimageFan fw = fibre(R, w);
  const auto& eps = R.eps();
  const int d = C.size();
  std::vector<cplx> f;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      f.push_back((-fw.hats[static_cast<std::size_t>(k)] - fz.hats[static_cast<std::size_t>(l)]) /
                  (eps[static_cast<std::size_t>(k)] + eps[static_cast<std::size_t>(l)]));
  // (eps_k - z) / (R(eps_k) - R(z)) is the reciprocal divided difference.
  for (int k = 0; k < d; ++k) {
    f.push_back(1.0 / guarded(R.divided_difference(z, eps[static_cast<std::size_t>(k)]), g, "R[z, eps_k]"));
    f.push_back(1.0 / guarded(R.divided_difference(w, eps[static_cast<std::size_t>(k)]), g, "R[w, eps_k]"));
  }
  return balanced_product(f) / guarded(z + w, g, "z + w");
}

cplx pair_final(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const double g = C.singular_guard();
  const auto& eps = R.eps();
  const int d = C.size();
  const cplx den = guarded(R.difference(w, -z), g, "R(w) - R(-z)");
  cplx sum = 0.0;
  for (int k = 0; k < d; ++k) {
    const double ek = eps[static_cast<std::size_t>(k)];
    const auto& hats = C.eps_fans()[static_cast<std::size_t>(k)].hats;
    std::vector<cplx> f;
    for (int j = 0; j < d; ++j)
      f.push_back(R.difference(w, -hats[static_cast<std::size_t>(j)]) /
                  guarded(R.difference(w, eps[static_cast<std::size_t>(j)]), g, "R(w) - R(eps_j)"));
    const cplx pre = guarded(R.difference(z, ek), g, "R(z) - R(eps_k)") * guarded(R.difference(ek, -w), g, "R(eps_k) - R(-w)");
    sum += C.r()[static_cast<std::size_t>(k)] / pre * balanced_product(f);
  }
  return (1.0 - C.coupling() * sum) / den;
}

cplx pair_new(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const double g = C.singular_guard();
  const auto& eps = R.eps();
  const int d = C.size();
  const double c = C.coupling();
  const cplx den = guarded(R.difference(w, -z), g, "R(w) - R(-z)") * guarded(R.difference(z, -w), g, "R(z) - R(-w)");
  std::vector<cplx> az(static_cast<std::size_t>(d)), bw(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    az[static_cast<std::size_t>(k)] = 1.0 / guarded(R.difference(eps[static_cast<std::size_t>(k)], z), g, "R(eps_k) - R(z)");
    bw[static_cast<std::size_t>(k)] = 1.0 / guarded(R.difference(eps[static_cast<std::size_t>(k)], w), g, "R(eps_k) - R(w)");
  }
  cplx single = 0.0;
  cplx dbl = 0.0;
  for (int k = 0; k < d; ++k) {
    const double rk = C.r()[static_cast<std::size_t>(k)];
    single += rk * (az[static_cast<std::size_t>(k)] + bw[static_cast<std::size_t>(k)]);
    for (int l = 0; l < d; ++l)
      dbl += rk * C.r()[static_cast<std::size_t>(l)] * C.G_matrix()(k, l) * az[static_cast<std::size_t>(k)] *
             bw[static_cast<std::size_t>(l)];
  }
  const cplx num = R(z) + R(w) + c * single + c * c * dbl;
  return num / den;
}

// ---- 1+1-point formulas -----------------------------------------------------

cplx alpha_factor(const SpectralCurve& C, cplx z) {
  std::vector<cplx> f;
  for (double a : C.alpha()) f.push_back(C.R().difference(z, a));
  return balanced_product(f);
}

cplx oneone_symm_direct(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const double g = C.singular_guard();
  const cplx dzw = guarded(R.difference(z, w), g, "R(z) - R(w)");
  const cplx pz = guarded(R.odd_eps_product(z), g, "(R(z) - R(-z)) prod_k (R(z) - R(eps_k))");
  const cplx pw = guarded(R.odd_eps_product(w), g, "(R(w) - R(-w)) prod_k (R(w) - R(eps_k))");
  const cplx shifted = R.difference(z, 0.0) + R.difference(w, 0.0);
  const cplx diag_part = shifted * alpha_factor(C, z) * alpha_factor(C, w) / (pz * pw);
  return C.lambda() * (pair_symm(C, z, w) - diag_part) / (dzw * dzw);
}

cplx oneone_sw31_direct(const SpectralCurve& C, cplx z, cplx w) {
  const RationalR& R = C.R();
  const double g = C.singular_guard();
  const int d = C.size();
  const auto& eps = R.eps();
  const cplx gww = pair_symm(C, w, w);
  const cplx odd = guarded(R.difference(z, -z), g, "R(z) - R(-z)");
  const cplx lead = (pair_symm(C, z, w) - gww) / guarded(R.difference(z, w), g, "R(z) - R(w)");
  std::vector<cplx> x(static_cast<std::size_t>(d));
  for (int l = 0; l < d; ++l) {
    const double al = C.alpha()[static_cast<std::size_t>(l)];
    x[static_cast<std::size_t>(l)] = (pair_symm(C, al, w) - gww) / guarded(R.difference(al, w), g, "R(alpha_l) - R(w)");
  }
  cplx sum = 0.0;
  for (int k = 0; k < d; ++k) {
    const cplx den = guarded(R.difference(z, eps[static_cast<std::size_t>(k)]), g, "R(z) - R(eps_k)");
    cplx inner = 0.0;
    for (int l = 0; l < d; ++l) inner += C.alpha_eps_inverse()(k, l) * x[static_cast<std::size_t>(l)];
    sum += inner / den;
  }
  return C.lambda() * (lead - sum) / odd;
}

// Near the diagonal both 1+1 formulas are 0/0. There G(w+s|w) is recovered
// from samples on a circle |s| = rho by the Cauchy integral formula
// (trapezoidal rule, geometrically convergent for |s| < rho).
cplx near_diagonal(const std::function<cplx(cplx, cplx)>& f, cplx z, cplx w) {
  constexpr int kNodes = 16;
  const double rho = 1e-2 * std::max(1.0, std::abs(w));
  const cplx s = z - w;
  cplx acc = 0.0;
  for (int j = 0; j < kNodes; ++j) {
    const cplx node = rho * std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / kNodes);
    acc += f(w + node, w) * node / (node - s);
  }
  return acc / static_cast<double>(kNodes);
}

bool is_near_diagonal(cplx z, cplx w) { return std::abs(z - w) < 1e-3 * std::max(1.0, std::abs(w)); }

}  // namespace

const char* to_string(PairFormula f) {
  switch (f) {
    case PairFormula::zhatw: return "zhatw";
    case PairFormula::symm: return "symm";
    case PairFormula::final_form: return "final";
    case PairFormula::new_form: return "new";
    case PairFormula::all: return "all";
  }
  return "?";
}

const char* to_string(OneOneFormula f) {
  switch (f) {
    case OneOneFormula::sw31: return "sw31";
    case OneOneFormula::symm: return "symm";
    case OneOneFormula::all: return "all";
  }
  return "?";
}

PairFormula parse_pair_formula(const std::string& name) {
  for (auto f : {PairFormula::zhatw, PairFormula::symm, PairFormula::final_form, PairFormula::new_form, PairFormula::all})
    if (name == to_string(f)) return f;
  throw Error(ErrorKind::InvalidInput, "unknown two-point formula '" + name + "'");
}

OneOneFormula parse_oneone_formula(const std::string& name) {
  for (auto f : {OneOneFormula::sw31, OneOneFormula::symm, OneOneFormula::all})
    if (name == to_string(f)) return f;
  throw Error(ErrorKind::InvalidInput, "unknown 1+1-point formula '" + name + "'");
}

SpectralCurve::SpectralCurve(SpectralData data, CurveTolerances tol)
    : data_(std::move(data)), R_(data_.curve(tol)) {
  const int d = R_.size();
  for (int k = 0; k < d; ++k) eps_fans_.push_back(hat_fan(R_, R_.eps()[static_cast<std::size_t>(k)]));
  alpha_ = alpha_roots(R_);
  if (is_free()) {
    G_.resize(d, d);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) G_(k, l) = 1.0 / (R_.eps()[static_cast<std::size_t>(k)] + R_.eps()[static_cast<std::size_t>(l)]);
    return;
  }
  G_ = compute_G_matrix(R_, eps_fans_);
  // alpha_k are ascending while eps keeps input order; the sum over l below is order-free.
  CauchyNodes nodes;
  for (double a : alpha_.alpha) nodes.a.push_back(R_(a));
  for (double e : R_.eps()) nodes.b.push_back(R_(e));
  alpha_eps_inverse_ = cauchy_inverse(nodes).entries;
}

Eigen::MatrixXd G_matrix(const SpectralData& S) { return SpectralCurve(S).G_matrix(); }

CorrelatorValue G0_pair(const SpectralCurve& C, cplx z, cplx w, PairFormula formula) {
  if (C.is_free()) {
    const cplx v = 1.0 / guarded(z + w, C.singular_guard(), "z + w");
    return {v, "free", 0.0, {{"free", v}}};
  }
  const std::vector<std::pair<PairFormula, cplx (*)(const SpectralCurve&, cplx, cplx)>> table{
      {PairFormula::zhatw, pair_zhatw},
      {PairFormula::symm, pair_symm},
      {PairFormula::final_form, pair_final},
      {PairFormula::new_form, pair_new},
  };
  std::vector<FormulaValue> vals;
  Error last(ErrorKind::SingularPoint, "no formula applicable");
  for (const auto& [tag, fn] : table) {
    if (formula != PairFormula::all && formula != tag) continue;
    if (formula != PairFormula::all) {
      vals.push_back({to_string(tag), evaluate([&] { return fn(C, z, w); })});
      break;
    }
    try {
      vals.push_back({to_string(tag), evaluate([&] { return fn(C, z, w); })});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularPoint) throw;
      last = e;
    }
  }
  if (vals.empty()) throw last;
  return collect(std::move(vals), to_string(formula));
}

CorrelatorValue G0_diag(const SpectralCurve& C, cplx z) {
  if (C.is_free()) {
    const cplx v = 1.0 / guarded(2.0 * z, C.singular_guard(), "2z");
    return {v, "free", 0.0, {{"free", v}}};
  }
  const cplx v = evaluate([&] {
    const RationalR& R = C.R();
    const cplx p = guarded(R.odd_eps_product(z), C.singular_guard(), "(R(z) - R(-z)) prod_k (R(z) - R(eps_k))");
    const cplx a = alpha_factor(C, z);
    return 2.0 * R.difference(z, 0.0) * a * a / (p * p);
  });
  return {v, "diag", 0.0, {{"diag", v}}};
}

CorrelatorValue G0_oneone(const SpectralCurve& C, cplx z, cplx w, OneOneFormula formula) {
  if (C.is_free()) return {0.0, "free", 0.0, {{"free", 0.0}}};
  const bool near = is_near_diagonal(z, w);
  const auto run = [&](cplx (*fn)(const SpectralCurve&, cplx, cplx)) {
    return evaluate([&] {
      if (!near) return fn(C, z, w);
      return near_diagonal([&](cplx a, cplx b) { return fn(C, a, b); }, z, w);
    });
  };
  std::vector<FormulaValue> vals;
  if (formula == OneOneFormula::symm || formula == OneOneFormula::all) vals.push_back({"symm", run(oneone_symm_direct)});
  if (formula == OneOneFormula::sw31 || formula == OneOneFormula::all) vals.push_back({"sw31", run(oneone_sw31_direct)});
  return collect(std::move(vals), to_string(formula));
}

}  // namespace qkm
