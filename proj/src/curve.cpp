#include "qkm/curve.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qkm {

namespace {

bool is_real(cplx z, double tol) { return std::abs(z.imag()) <= tol * std::max(1.0, std::abs(z)); }

using Poly = std::vector<cplx>;  // coefficients, lowest degree first

Poly multiply_linear(const Poly& p, cplx root_shift) {
  // p(z) * (z + root_shift)
  Poly out(p.size() + 1, cplx(0.0));
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] += p[i] * root_shift;
    out[i + 1] += p[i];
  }
  return out;
}

std::vector<cplx> monic_roots(const Poly& p) {
  const int n = static_cast<int>(p.size()) - 1;
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p[static_cast<std::size_t>(i)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::RootCountMismatch, "companion eigenvalue solve failed");
  std::vector<cplx> roots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  return roots;
}

// Greedy unique matching of labelled anchors to candidate points by distance.
std::vector<int> nearest_assignment(const std::vector<cplx>& anchors, const std::vector<cplx>& points) {
  struct Pair {
    double dist;
    int anchor;
    int point;
  };
  std::vector<Pair> pairs;
  for (int a = 0; a < static_cast<int>(anchors.size()); ++a)
    for (int p = 0; p < static_cast<int>(points.size()); ++p)
      pairs.push_back({std::abs(anchors[static_cast<std::size_t>(a)] - points[static_cast<std::size_t>(p)]), a, p});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.dist < y.dist; });
  std::vector<int> match(anchors.size(), -1);
  std::vector<bool> used(points.size(), false);
  for (const auto& pr : pairs) {
    if (match[static_cast<std::size_t>(pr.anchor)] >= 0 || used[static_cast<std::size_t>(pr.point)]) continue;
    match[static_cast<std::size_t>(pr.anchor)] = pr.point;
    used[static_cast<std::size_t>(pr.point)] = true;
  }
  return match;
}

int nearest_index(const std::vector<cplx>& roots, cplx u) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(roots.size()); ++i)
    if (std::abs(roots[static_cast<std::size_t>(i)] - u) < std::abs(roots[static_cast<std::size_t>(best)] - u)) best = i;
  return best;
}

void require_base_match(const RationalR& R, cplx root, cplx u) {
  if (std::abs(root - u) > R.tolerances().base_match * R.scale() * std::max(1.0, std::abs(u))) {
    std::ostringstream msg;
    msg << "no preimage of R(u) matches u = " << u << " (closest " << root << ")";
    throw Error(ErrorKind::BaseNotFound, msg.str());
  }
}

// Real fibre: sorted descending, root r_l (l >= 1) lies in (-s_{l+1}, -s_l) for the
// ascending eps s_1 < ... < s_d and is labelled by that eps. If the base is r_m
// with m >= 1, the root r_0 in (-s_1, inf) takes over label m.
PreimageFan real_fan(const RationalR& R, double u) {
  const double v = R(u).real();
  std::vector<cplx> roots = preimages(R, v);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
  const int m = nearest_index(roots, u);
  require_base_match(R, roots[static_cast<std::size_t>(m)], u);
  PreimageFan fan{roots[static_cast<std::size_t>(m)], std::vector<cplx>(static_cast<std::size_t>(R.size())), v, false};
  const auto& order = R.ascending();
  for (int l = 1; l <= R.size(); ++l) {
    const int label = order[static_cast<std::size_t>(l - 1)];
    fan.hats[static_cast<std::size_t>(label)] = (l == m) ? roots[0] : roots[static_cast<std::size_t>(l)];
  }
  return fan;
}

PreimageFan nearest_fan(const RationalR& R, cplx u, const std::vector<cplx>& anchors) {
  const cplx v = R(u);
  std::vector<cplx> roots = preimages(R, v);
  const int b = nearest_index(roots, u);
  require_base_match(R, roots[static_cast<std::size_t>(b)], u);
  PreimageFan fan{roots[static_cast<std::size_t>(b)], {}, v, false};
  roots.erase(roots.begin() + b);
  const auto match = nearest_assignment(anchors, roots);
  for (int k : match) fan.hats.push_back(roots[static_cast<std::size_t>(k)]);
  return fan;
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::DegenerateFiber: return "DegenerateFiber";
    case ErrorKind::ZeroCoupling: return "ZeroCoupling";
    case ErrorKind::BaseNotFound: return "BaseNotFound";
    case ErrorKind::RootCountMismatch: return "RootCountMismatch";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::ChamberExit: return "ChamberExit";
    case ErrorKind::NodeCollision: return "NodeCollision";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::BranchInversionFailure: return "BranchInversionFailure";
    case ErrorKind::OddN: return "OddN";
    case ErrorKind::InvalidType: return "InvalidType";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

RationalR::RationalR(std::vector<double> eps, std::vector<double> rho, double coupling, double scale,
                     CurveTolerances tol)
    : eps_(std::move(eps)), rho_(std::move(rho)), coupling_(coupling), scale_(scale), tol_(tol) {
  if (eps_.empty() || eps_.size() != rho_.size())
    throw Error(ErrorKind::InvalidInput, "eps and rho must be nonempty lists of equal length");
  if (!(coupling_ >= 0.0) || !std::isfinite(coupling_)) throw Error(ErrorKind::InvalidInput, "coupling must be finite and >= 0");
  if (!(scale_ >= 1.0)) throw Error(ErrorKind::InvalidInput, "scale must be >= 1");
  for (std::size_t k = 0; k < eps_.size(); ++k) {
    if (!(eps_[k] > 0.0) || !std::isfinite(eps_[k])) throw Error(ErrorKind::InvalidInput, "eps must be positive");
    if (!(rho_[k] > 0.0) || !std::isfinite(rho_[k])) throw Error(ErrorKind::InvalidInput, "rho must be positive");
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(eps_[k] - eps_[j]) <= 1e-12 * std::max(eps_[k], eps_[j]))
        throw Error(ErrorKind::InvalidInput, "eps must be pairwise distinct");
  }
  ascending_.resize(eps_.size());
  std::iota(ascending_.begin(), ascending_.end(), 0);
  std::sort(ascending_.begin(), ascending_.end(), [this](int a, int b) {
    return eps_[static_cast<std::size_t>(a)] < eps_[static_cast<std::size_t>(b)];
  });
}

void RationalR::require_regular(cplx z) const {
  for (double e : eps_) {
    if (std::abs(z + e) <= tol_.pole_guard * scale_) {
      std::ostringstream msg;
      msg << "z = " << z << " is at the pole -" << e;
      throw Error(ErrorKind::PoleHit, msg.str());
    }
  }
}

cplx RationalR::operator()(cplx z) const {
  require_regular(z);
  cplx sum = 0.0;
  for (std::size_t k = 0; k < eps_.size(); ++k) sum += rho_[k] / (eps_[k] + z);
  return z - coupling_ * sum;
}

cplx RationalR::derivative(cplx z) const {
  require_regular(z);
  cplx sum = 0.0;
  for (std::size_t k = 0; k < eps_.size(); ++k) sum += rho_[k] / ((eps_[k] + z) * (eps_[k] + z));
  return 1.0 + coupling_ * sum;
}

cplx RationalR::divided_difference(cplx z, cplx w) const {
  require_regular(z);
  require_regular(w);
  cplx sum = 0.0;
  for (std::size_t k = 0; k < eps_.size(); ++k) sum += rho_[k] / ((eps_[k] + z) * (eps_[k] + w));
  return 1.0 + coupling_ * sum;
}

cplx RationalR::difference(cplx z, cplx w) const { return (z - w) * divided_difference(z, w); }

cplx RationalR::odd_eps_product(cplx z) const {
  require_regular(z);
  const std::size_t d = eps_.size();
  std::vector<cplx> lin(d);
  for (std::size_t k = 0; k < d; ++k) lin[k] = z - eps_[k];
  cplx correction = 0.0;
  std::vector<cplx> others;
  for (std::size_t j = 0; j < d; ++j) {
    others.clear();
    for (std::size_t k = 0; k < d; ++k)
      if (k != j) others.push_back(lin[k]);
    correction += rho_[j] / (eps_[j] + z) * balanced_product(others);
  }
  std::vector<cplx> dd(d);
  for (std::size_t k = 0; k < d; ++k) dd[k] = divided_difference(z, eps_[k]);
  return 2.0 * z * (balanced_product(lin) - coupling_ * correction) * balanced_product(dd);
}

cplx eval_R(const RationalR& R, cplx z) { return R(z); }

cplx eval_R_prime(const RationalR& R, cplx z) { return R.derivative(z); }

std::vector<cplx> preimages(const RationalR& R, cplx v) {
  if (R.coupling() == 0.0) throw Error(ErrorKind::ZeroCoupling, "R is the identity; the only preimage of v is v");
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error(ErrorKind::InvalidInput, "v must be finite");
  const bool real_fibre = is_real(v, R.tolerances().real_axis);
  if (real_fibre) v = v.real();

  const std::size_t d = static_cast<std::size_t>(R.size());
  // P(z) = (z - v) prod_k (z + eps_k) - coupling * sum_k rho_k prod_{j != k} (z + eps_j)
  Poly full{1.0};
  for (double e : R.eps()) full = multiply_linear(full, e);
  Poly poly = multiply_linear(full, -v);
  for (std::size_t k = 0; k < d; ++k) {
    Poly loo{1.0};
    for (std::size_t j = 0; j < d; ++j)
      if (j != k) loo = multiply_linear(loo, R.eps()[j]);
    for (std::size_t i = 0; i < loo.size(); ++i) poly[i] -= R.coupling() * R.rho()[k] * loo[i];
  }

  std::vector<cplx> roots = monic_roots(poly);
  if (real_fibre)
    for (auto& z : roots) z = z.real();  // every root of a real fibre is real for positive data

  const double tol = R.tolerances().root_residual * std::max(1.0, std::abs(v));
  for (auto& z : roots) {
    for (int step = 0; step < 8; ++step) {
      const cplx f = R(z) - v;
      if (step >= 2 && std::abs(f) < 1e-3 * tol) break;
      const cplx dz = f / R.derivative(z);
      z -= dz;
      if (std::abs(dz) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z)) && step >= 1) break;
    }
    // near a pole an ulp of z already moves R by |R'| ulp
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z)) * std::abs(R.derivative(z));
    if (!(std::abs(R(z) - v) < tol + floor)) {
      std::ostringstream msg;
      msg << "root " << z << " of R(z) = " << v << " did not polish to tolerance";
      throw Error(ErrorKind::DegenerateFiber, msg.str());
    }
  }

  const double sep = R.tolerances().degenerate_fiber * R.scale();
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(roots[i] - roots[j]) < sep) {
        std::ostringstream msg;
        msg << "fibre over " << v << " is ramified near " << roots[i];
        throw Error(ErrorKind::DegenerateFiber, msg.str());
      }
  return roots;
}

PreimageFan hat_fan(const RationalR& R, cplx u) {
  const int d = R.size();
  if (R.coupling() == 0.0) {
    PreimageFan fan{u, {}, u, false};
    for (double e : R.eps()) fan.hats.push_back(-e);
    return fan;
  }
  if (is_real(u, R.tolerances().real_axis)) return real_fan(R, u.real());

  std::vector<cplx> neg_eps;
  for (double e : R.eps()) neg_eps.push_back(-e);

  // Continuation from the real anchor Re(u) in 16 steps of the imaginary part.
  PreimageFan fan;
  try {
    fan = real_fan(R, u.real());
  } catch (const Error&) {
    return nearest_fan(R, u, neg_eps);
  }
  constexpr int kSteps = 16;
  const double amb = R.tolerances().track_ambiguity * R.scale();
  for (int s = 1; s <= kSteps; ++s) {
    const cplx us(u.real(), u.imag() * s / kSteps);
    const cplx v = R(us);
    std::vector<cplx> roots = preimages(R, v);
    const int b = nearest_index(roots, us);
    require_base_match(R, roots[static_cast<std::size_t>(b)], us);
    const cplx base = roots[static_cast<std::size_t>(b)];
    roots.erase(roots.begin() + b);
    const auto match = nearest_assignment(fan.hats, roots);
    std::vector<cplx> next(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) next[static_cast<std::size_t>(k)] = roots[static_cast<std::size_t>(match[static_cast<std::size_t>(k)])];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(next[static_cast<std::size_t>(i)] - next[static_cast<std::size_t>(j)]) < amb) fan.ordering_ambiguous = true;
    fan.base = base;
    fan.value = v;
    fan.hats = std::move(next);
  }
  return fan;
}

PreimageFan fibre(const RationalR& R, cplx u) {
  std::vector<cplx> neg_eps;
  for (double e : R.eps()) neg_eps.push_back(-e);
  if (R.coupling() == 0.0) return PreimageFan{u, neg_eps, u, false};
  return nearest_fan(R, u, neg_eps);
}

AlphaRoots alpha_roots(const RationalR& R) {
  const int d = R.size();
  AlphaRoots out;
  const auto& order = R.ascending();
  std::vector<double> sq(static_cast<std::size_t>(d));
  std::vector<double> w(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double e = R.eps()[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    sq[static_cast<std::size_t>(i)] = e * e;
    w[static_cast<std::size_t>(i)] = R.rho()[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  if (R.coupling() == 0.0) {
    for (int i = 0; i < d; ++i) out.alpha.push_back(std::sqrt(sq[static_cast<std::size_t>(i)]));
    return out;
  }
  const double c = R.coupling();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);

  // Secular function 1 - c sum_j w_j / (s - sq_j), written in the offset x = s - sq_i.
  for (int i = 0; i < d; ++i) {
    const auto secular = [&](double x) {
      double sum = 0.0;
      for (int j = 0; j < d; ++j) {
        const double den = (j == i) ? x : (sq[static_cast<std::size_t>(i)] - sq[static_cast<std::size_t>(j)]) + x;
        sum += w[static_cast<std::size_t>(j)] / den;
      }
      return 1.0 - c * sum;
    };
    const double width = (i + 1 < d) ? sq[static_cast<std::size_t>(i + 1)] - sq[static_cast<std::size_t>(i)] : 2.0 * c * total + 1e-300;
    double lo = 0.0;
    double hi = width;
    if (i + 1 == d && secular(hi) < 0.0)
      throw Error(ErrorKind::RootCountMismatch, "secular function has no sign change above the largest eps^2");
    for (int it = 0; it < 4000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (secular(mid) < 0.0 ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    if (!(x > 0.0 && x < width)) throw Error(ErrorKind::RootCountMismatch, "secular root escaped its interval");
    out.alpha.push_back(std::sqrt(sq[static_cast<std::size_t>(i)] + x));
  }
  return out;
}

double check_factorization(const RationalR& R, const PreimageFan& fan, cplx z) {
  const cplx lhs = R.difference(z, fan.base);
  std::vector<cplx> ratios;
  for (int k = 0; k < R.size(); ++k)
    ratios.push_back((z - fan.hats[static_cast<std::size_t>(k)]) / (z + R.eps()[static_cast<std::size_t>(k)]));
  const cplx rhs = (z - fan.base) * balanced_product(ratios);
  return relative_residual(lhs, rhs);
}

double check_factorization(const RationalR& R, cplx u, cplx z) { return check_factorization(R, hat_fan(R, u), z); }

cplx fan_residue(const RationalR& R, const PreimageFan& fan, int k) {
  const double ek = R.eps()[static_cast<std::size_t>(k)];
  std::vector<cplx> num{-ek - fan.base};
  for (cplx h : fan.hats) num.push_back(-ek - h);
  std::vector<cplx> den;
  for (int j = 0; j < R.size(); ++j)
    if (j != k) den.push_back(R.eps()[static_cast<std::size_t>(j)] - ek);
  return balanced_product(num) / balanced_product(den);
}

}  // namespace qkm
