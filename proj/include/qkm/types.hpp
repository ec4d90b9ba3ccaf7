#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkm {

using cplx = std::complex<double>;

enum class ErrorKind {
  PoleHit,
  DegenerateFiber,
  ZeroCoupling,
  BaseNotFound,
  RootCountMismatch,
  DomainViolation,
  Divergence,
  ChamberExit,
  NodeCollision,
  SingularPoint,
  BranchInversionFailure,
  OddN,
  InvalidType,
  InvalidInput,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes failure modes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Product of a list of factors, multiplied pairwise in a balanced tree.
template <class T>
T balanced_product(std::span<const T> factors) {
  if (factors.empty()) return T(1);
  std::vector<T> level(factors.begin(), factors.end());
  while (level.size() > 1) {
    std::vector<T> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(level[i] * level[i + 1]);
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
  }
  return level.front();
}

template <class T>
T balanced_product(const std::vector<T>& factors) {
  return balanced_product(std::span<const T>(factors));
}

/// |lhs - rhs| / max(1, |lhs|).
inline double relative_residual(cplx lhs, cplx rhs) {
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

}  // namespace qkm
