#include "qkm/series_jet.hpp"

#include <algorithm>

namespace qkm {

SeriesJet::SeriesJet(int order, cplx constant) : coeffs_(static_cast<std::size_t>(std::max(order, 0)) + 1, cplx(0.0)) {
  if (order < 0) throw Error(ErrorKind::InvalidInput, "series order must be >= 0");
  coeffs_[0] = constant;
}

SeriesJet::SeriesJet(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw Error(ErrorKind::InvalidInput, "series needs at least one coefficient");
}

SeriesJet SeriesJet::linear(int order, cplx a, cplx b) {
  SeriesJet s(order, a);
  if (order >= 1) s[1] = b;
  return s;
}

cplx SeriesJet::evaluate(cplx x) const {
  cplx acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

SeriesJet SeriesJet::truncated(int order) const {
  std::vector<cplx> c(coeffs_.begin(), coeffs_.begin() + std::min<std::size_t>(coeffs_.size(), order + 1));
  c.resize(static_cast<std::size_t>(order) + 1, cplx(0.0));
  return SeriesJet(std::move(c));
}

SeriesJet SeriesJet::reciprocal() const {
  if (coeffs_[0] == cplx(0.0)) throw Error(ErrorKind::DomainViolation, "reciprocal of a series with zero constant term");
  const int k = order();
  SeriesJet out(k);
  const cplx inv0 = 1.0 / coeffs_[0];
  out[0] = inv0;
  for (int n = 1; n <= k; ++n) {
    cplx acc = 0.0;
    for (int i = 1; i <= n; ++i) acc += coeffs_[static_cast<std::size_t>(i)] * out[n - i];
    out[n] = -acc * inv0;
  }
  return out;
}

SeriesJet& SeriesJet::operator+=(const SeriesJet& other) {
  if (other.order() < order()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SeriesJet& SeriesJet::operator-=(const SeriesJet& other) {
  if (other.order() < order()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SeriesJet& SeriesJet::operator*=(const SeriesJet& other) {
  const int k = std::min(order(), other.order());
  std::vector<cplx> out(static_cast<std::size_t>(k) + 1, cplx(0.0));
  for (int i = 0; i <= k; ++i) {
    if (coeffs_[static_cast<std::size_t>(i)] == cplx(0.0)) continue;
    for (int j = 0; i + j <= k; ++j) out[static_cast<std::size_t>(i + j)] += coeffs_[static_cast<std::size_t>(i)] * other[j];
  }
  coeffs_ = std::move(out);
  return *this;
}

SeriesJet& SeriesJet::operator*=(cplx s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

}  // namespace qkm
