#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qkm/spectral.hpp"

namespace qkm::testing {

// Deterministic uniform doubles, independent of the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::mt19937_64 gen_;
};

// E in [0.5, 5] with pairwise gaps >= 0.05, r in [1, 3], N = sum r, lambda in (0, lambda_max].
inline ModelInput random_instance(Rng& rng, int d, double lambda_max = 0.2) {
  std::vector<double> E;
  while (static_cast<int>(E.size()) < d) {
    const double e = rng.uniform(0.5, 5.0);
    if (std::all_of(E.begin(), E.end(), [&](double x) { return std::abs(x - e) >= 0.05; })) E.push_back(e);
  }
  std::vector<double> r;
  for (int k = 0; k < d; ++k) r.push_back(rng.uniform(1.0, 3.0));
  const double lambda = lambda_max * (1.0 - rng.uniform(0.0, 1.0));  // in (0, lambda_max]
  return ModelInput::make(E, r, lambda);
}

// count instances with d cycling through 1..d_max.
inline std::vector<ModelInput> corpus(int count, int d_max, std::uint64_t seed, double lambda_max = 0.2) {
  Rng rng(seed);
  std::vector<ModelInput> out;
  for (int i = 0; i < count; ++i) out.push_back(random_instance(rng, 1 + i % d_max, lambda_max));
  return out;
}

}  // namespace qkm::testing
