#include "qkm/combinatorics.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace qkm {

namespace {

// Grows the partition by placing the smallest unplaced element together with an
// odd number of the other unplaced ones.
void grow(std::vector<int> rest, std::vector<std::vector<int>>& blocks, int n, std::vector<SetPartition>& out) {
  if (rest.empty()) {
    out.push_back({n, blocks});
    return;
  }
  const int head = rest.front();
  rest.erase(rest.begin());
  const int m = static_cast<int>(rest.size());
  for (int size = (m % 2 == 1) ? m : m - 1; size >= 1; size -= 2) {
    // Lexicographic combinations of `size` elements out of rest.
    std::vector<int> pick(static_cast<std::size_t>(size));
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      std::vector<int> block{head};
      std::vector<int> left;
      for (int i = 0, j = 0; i < m; ++i) {
        if (j < size && pick[static_cast<std::size_t>(j)] == i) {
          block.push_back(rest[static_cast<std::size_t>(i)]);
          ++j;
        } else {
          left.push_back(rest[static_cast<std::size_t>(i)]);
        }
      }
      blocks.push_back(block);
      grow(left, blocks, n, out);
      blocks.pop_back();

      int i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - size + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void integer_partitions(int left, int max_part, std::vector<int>& counts, std::vector<CycleType>& out) {
  if (left == 0) {
    out.push_back({counts});
    return;
  }
  for (int part = std::min(left, max_part); part >= 1; --part) {
    ++counts[static_cast<std::size_t>(part - 1)];
    integer_partitions(left - part, part, counts, out);
    --counts[static_cast<std::size_t>(part - 1)];
  }
}

Rational wick(const std::vector<Rational>& E, const Rational& N, const std::vector<IndexPair>& f, std::vector<bool>& used) {
  const auto first = std::find(used.begin(), used.end(), false);
  if (first == used.end()) return Rational(1);
  const auto i = static_cast<std::size_t>(first - used.begin());
  used[i] = true;
  Rational total = 0;
  for (std::size_t j = i + 1; j < f.size(); ++j) {
    if (used[j]) continue;
    const auto [k1, l1] = f[i];
    const auto [k2, l2] = f[j];
    if (l1 != k2 || k1 != l2) continue;
    used[j] = true;
    total += wick(E, N, f, used) / (N * (E[static_cast<std::size_t>(k1)] + E[static_cast<std::size_t>(l1)]));
    used[j] = false;
  }
  used[i] = false;
  return total;
}

// lambda = 0 cumulant of a block of matrix units. Only a single 2-cycle survives:
// N^2 <e_ab e_ba>_c = N G_|ab| with G_|ab| = 1/(E_a + E_b).
Rational free_cumulant(const std::vector<Rational>& E, const Rational& N, const std::vector<IndexPair>& block) {
  if (block.size() != 2) return 0;
  const auto [k1, l1] = block[0];
  const auto [k2, l2] = block[1];
  // sigma = transposition: (l1, l2) = (k2, k1). When the identity also fits the
  // labels coincide and the transposition is the relevant reading.
  if (l1 == k2 && l2 == k1) return 1 / (N * (E[static_cast<std::size_t>(k1)] + E[static_cast<std::size_t>(k2)]));
  return 0;
}

void require_indices(const std::vector<Rational>& E, const std::vector<IndexPair>& f) {
  for (const auto& [k, l] : f)
    if (k < 0 || l < 0 || k >= static_cast<int>(E.size()) || l >= static_cast<int>(E.size()))
      throw Error(ErrorKind::InvalidInput, "matrix-unit index out of range of E");
}

}  // namespace

int CycleType::cycles() const { return std::accumulate(counts.begin(), counts.end(), 0); }

void CycleType::validate() const {
  long total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw Error(ErrorKind::InvalidType, "cycle counts must be nonnegative");
    total += static_cast<long>(i + 1) * counts[i];
  }
  if (total != static_cast<long>(counts.size())) {
    std::ostringstream msg;
    msg << "sum_i i * l_i = " << total << " differs from n = " << counts.size();
    throw Error(ErrorKind::InvalidType, msg.str());
  }
}

std::vector<SetPartition> even_partitions(int n) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "n must be nonnegative");
  if (n % 2 != 0) throw Error(ErrorKind::OddN, "even partitions need even n");
  if (n > 12) throw Error(ErrorKind::InvalidInput, "n must be at most 12");
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 1);
  std::vector<SetPartition> out;
  std::vector<std::vector<int>> blocks;
  grow(all, blocks, n, out);
  return out;
}

BigInt cycle_type_count(const CycleType& t) {
  t.validate();
  BigInt den = 1;
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    const int len = static_cast<int>(i + 1);
    for (int c = 0; c < t.counts[i]; ++c) den *= len;
    den *= factorial(t.counts[i]);
  }
  return factorial(t.n()) / den;
}

std::vector<CycleType> cycle_types(int n) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "n must be nonnegative");
  std::vector<CycleType> out;
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  integer_partitions(n, n, counts, out);
  return out;
}

Rational gaussian_moment(const std::vector<Rational>& E, const Rational& N, const std::vector<IndexPair>& factors) {
  require_indices(E, factors);
  if (factors.size() % 2 != 0) return 0;
  std::vector<bool> used(factors.size(), false);
  return wick(E, N, factors, used);
}

Rational cumulant_assembly(const std::vector<Rational>& E, const Rational& N, const std::vector<IndexPair>& factors) {
  require_indices(E, factors);
  const int n = static_cast<int>(factors.size());
  if (n % 2 != 0) return 0;
  Rational total = 0;
  for (const SetPartition& p : even_partitions(n)) {
    Rational term = 1;
    for (const auto& block : p.blocks) {
      std::vector<IndexPair> sub;
      for (int i : block) sub.push_back(factors[static_cast<std::size_t>(i - 1)]);
      term *= free_cumulant(E, N, sub);
      if (term == 0) break;
    }
    total += term;
  }
  return total;
}

ResidualReport check_moment_cumulant(const std::vector<Rational>& E, const Rational& N, int n, int samples,
                                     std::uint64_t seed) {
  if (n % 2 != 0) throw Error(ErrorKind::OddN, "moment-cumulant check needs even n");
  if (n != 2 && n != 4 && n != 6) throw Error(ErrorKind::InvalidInput, "moment-cumulant check supports n in {2, 4, 6}");
  if (E.empty()) throw Error(ErrorKind::InvalidInput, "E must be nonempty");
  const int d = static_cast<int>(E.size());
  ResidualReport rep{"moment_cumulant"};

  const auto compare = [&](const std::vector<IndexPair>& f) {
    const Rational diff = gaussian_moment(E, N, f) - cumulant_assembly(E, N, f);
    double r = 0.0;
    if (diff != 0) {
      r = std::abs(diff.convert_to<double>());
      if (r == 0.0) r = 1e-300;
    }
    std::vector<cplx> pt;
    for (const auto& [k, l] : f) {
      pt.emplace_back(k);
      pt.emplace_back(l);
    }
    rep.add(r, pt);
  };
  const auto build = [&](const std::vector<int>& k, const std::vector<int>& sigma) {
    std::vector<IndexPair> f;
    for (int i = 0; i < n; ++i) f.emplace_back(k[static_cast<std::size_t>(i)], k[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])]);
    return f;
  };

  if (n <= 4) {
    // every k-tuple, every sigma with l = k o sigma
    std::vector<int> k(static_cast<std::size_t>(n), 0);
    while (true) {
      std::vector<int> sigma(static_cast<std::size_t>(n));
      std::iota(sigma.begin(), sigma.end(), 0);
      do compare(build(k, sigma));
      while (std::next_permutation(sigma.begin(), sigma.end()));
      int i = n - 1;
      while (i >= 0 && k[static_cast<std::size_t>(i)] == d - 1) k[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
      ++k[static_cast<std::size_t>(i)];
    }
    return rep;
  }

  std::mt19937_64 rng(seed);
  const auto draw = [&](int hi) { return static_cast<int>(rng() % static_cast<std::uint64_t>(hi)); };
  for (int s = 0; s < samples; ++s) {
    std::vector<int> k(static_cast<std::size_t>(n));
    for (int& v : k) v = draw(d);
    std::vector<int> sigma(static_cast<std::size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(sigma[static_cast<std::size_t>(i)], sigma[static_cast<std::size_t>(draw(i + 1))]);
    std::vector<IndexPair> f = build(k, sigma);
    // every fifth draw scrambles the column indices, so both sides should vanish
    if (s % 5 == 4)
      for (auto& p : f) p.second = draw(d);
    compare(f);
  }
  return rep;
}

ResidualReport check_moment_cumulant(const std::vector<double>& E, double N, int n, int samples, std::uint64_t seed) {
  std::vector<Rational> exact;
  for (double e : E) exact.emplace_back(e);
  return check_moment_cumulant(exact, Rational(N), n, samples, seed);
}

}  // namespace qkm
