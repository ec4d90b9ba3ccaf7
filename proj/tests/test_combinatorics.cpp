#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "qkm/combinatorics.hpp"

using namespace qkm;

namespace {

// Brute force: every set partition via restricted growth strings.
std::vector<std::vector<std::vector<int>>> all_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  const std::function<void(int, int)> rec = [&](int i, int m) {
    if (i == n) {
      std::vector<std::vector<int>> blocks(static_cast<std::size_t>(m));
      for (int j = 0; j < n; ++j) blocks[a[j]].push_back(j + 1);
      out.push_back(blocks);
      return;
    }
    for (int v = 0; v <= m; ++v) {
      a[i] = v;
      rec(i + 1, std::max(m, v + 1));
    }
  };
  if (n == 0) return {{}};
  rec(0, 0);
  return out;
}

std::set<std::vector<std::vector<int>>> as_set(const std::vector<SetPartition>& ps) {
  std::set<std::vector<std::vector<int>>> s;
  for (const auto& p : ps) s.insert(p.blocks);
  return s;
}

}  // namespace

TEST_CASE("even partitions: small cases") {
  const auto p2 = even_partitions(2);
  REQUIRE(p2.size() == 1);
  CHECK(p2[0].blocks == std::vector<std::vector<int>>{{1, 2}});

  const std::set<std::vector<std::vector<int>>> four{
      {{1, 2, 3, 4}}, {{1, 2}, {3, 4}}, {{1, 3}, {2, 4}}, {{1, 4}, {2, 3}}};
  const auto p4 = even_partitions(4);
  CHECK(p4.size() == 4);
  CHECK(as_set(p4) == four);
}

TEST_CASE("even partitions against a brute-force filter") {
  CHECK(all_partitions(6).size() == 203);
  for (int n = 0; n <= 10; n += 2) {
    std::set<std::vector<std::vector<int>>> filtered;
    for (const auto& p : all_partitions(n))
      if (std::all_of(p.begin(), p.end(), [](const auto& b) { return b.size() % 2 == 0; })) filtered.insert(p);
    const auto ours = even_partitions(n);
    CHECK(ours.size() == filtered.size());
    CHECK(as_set(ours) == filtered);
  }
  CHECK(even_partitions(6).size() == 31);
}

TEST_CASE("even partitions errors") {
  try {
    even_partitions(5);
    FAIL("expected OddN");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OddN);
  }
  CHECK_THROWS_AS(even_partitions(14), Error);
}

TEST_CASE("cycle type counts") {
  CHECK(cycle_type_count({{0, 2, 0, 0}}) == 3);
  CHECK(cycle_type_count({{5, 0, 0, 0, 0}}) == 1);
  BigInt fact = 1;
  for (int n = 1; n <= 8; ++n) {
    fact *= n;
    BigInt total = 0;
    for (const CycleType& t : cycle_types(n)) total += cycle_type_count(t);
    CHECK(total == fact);
  }
  try {
    cycle_type_count({{1, 1}});
    FAIL("expected InvalidType");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidType);
  }
}

TEST_CASE("cycle type counts against permutation enumeration") {
  for (int n = 1; n <= 6; ++n) {
    std::map<std::vector<int>, long> seen;
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    do {
      std::vector<int> counts(static_cast<std::size_t>(n), 0);
      std::vector<bool> done(static_cast<std::size_t>(n), false);
      for (int i = 0; i < n; ++i) {
        if (done[i]) continue;
        int len = 0;
        for (int j = i; !done[j]; j = p[j]) {
          done[j] = true;
          ++len;
        }
        ++counts[len - 1];
      }
      ++seen[counts];
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(seen.size() == cycle_types(n).size());
    for (const auto& [counts, num] : seen) CHECK(cycle_type_count({counts}) == num);
  }
}

TEST_CASE("Gaussian moments") {
  const std::vector<Rational> E{Rational(1), Rational(3, 2), Rational(4)};
  const Rational N(5);
  CHECK(gaussian_moment(E, N, {{0, 1}, {1, 0}}) == 1 / (N * (E[0] + E[1])));
  CHECK(gaussian_moment(E, N, {{0, 1}, {0, 1}}) == 0);
  CHECK(gaussian_moment(E, N, {{0, 1}, {1, 0}, {0, 1}}) == 0);
  // pairings (12)(34) and (14)(23) survive, (13)(24) does not
  const Rational c = 1 / (N * (E[0] + E[1]));
  CHECK(gaussian_moment(E, N, {{0, 1}, {1, 0}, {0, 1}, {1, 0}}) == 2 * c * c);
  CHECK(cumulant_assembly(E, N, {{0, 1}, {1, 0}, {0, 1}, {1, 0}}) == 2 * c * c);
  CHECK(gaussian_moment(E, N, {{2, 2}, {2, 2}}) == 1 / (N * 8));
}

TEST_CASE("moment-cumulant decomposition is exact") {
  const std::vector<Rational> E{Rational(1, 3), Rational(2), Rational(7, 5)};
  for (int n : {2, 4, 6}) {
    const ResidualReport r = check_moment_cumulant(E, Rational(4), n);
    CHECK(r.max_residual == 0.0);
    CHECK(r.sample_count > 0);
  }
  CHECK(check_moment_cumulant(std::vector<double>{0.5, 1.25}, 2.0, 4).max_residual == 0.0);
  CHECK_THROWS_AS(check_moment_cumulant(E, Rational(4), 3), Error);
  CHECK_THROWS_AS(check_moment_cumulant(E, Rational(4), 8), Error);
}
