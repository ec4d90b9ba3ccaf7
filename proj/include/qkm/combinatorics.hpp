#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <utility>
#include <vector>

#include "qkm/report.hpp"

namespace qkm {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Partition of {1, ..., n}. Blocks are ascending and ordered by their smallest element.
struct SetPartition {
  int n = 0;
  std::vector<std::vector<int>> blocks;

  bool operator==(const SetPartition&) const = default;
};

/// counts[i - 1] = number of cycles of length i; sum_i i * counts[i - 1] must equal counts.size().
struct CycleType {
  std::vector<int> counts;

  int n() const { return static_cast<int>(counts.size()); }
  int cycles() const;
  /// Throws InvalidType.
  void validate() const;
};

/// All partitions of {1..n} whose blocks have even size. Throws OddN for odd n.
std::vector<SetPartition> even_partitions(int n);

/// n! / prod_i (i^{l_i} l_i!).
BigInt cycle_type_count(const CycleType& t);

/// Every cycle type of S_n.
std::vector<CycleType> cycle_types(int n);

/// Index pair (k, l) of the matrix unit e_kl; indices point into E.
using IndexPair = std::pair<int, int>;

/// Gaussian moment of prod_i Phi(e_{k_i l_i}) as a sum over Wick pairings, with
/// covariance <Phi(e_jk) Phi(e_lm)> = delta_kl delta_jm / (N (E_j + E_k)).
Rational gaussian_moment(const std::vector<Rational>& E, const Rational& N, const std::vector<IndexPair>& factors);

/// The same moment assembled from cumulants over even partitions, using only the
/// lambda = 0 cumulants: length-two blocks of cycle type one 2-cycle, all others zero.
Rational cumulant_assembly(const std::vector<Rational>& E, const Rational& N, const std::vector<IndexPair>& factors);

/// Compares both sides exactly over index tuples: exhaustive for n <= 4, `samples` draws for n = 6.
/// max_residual is 0 exactly when every comparison agrees.
ResidualReport check_moment_cumulant(const std::vector<Rational>& E, const Rational& N, int n, int samples = 500,
                                     std::uint64_t seed = 1);
ResidualReport check_moment_cumulant(const std::vector<double>& E, double N, int n, int samples = 500,
                                     std::uint64_t seed = 1);

}  // namespace qkm
