#pragma once

#include <vector>

#include "qkm/types.hpp"

namespace qkm {

// Truncated power series c_0 + c_1 x + ... + c_K x^K. Every arithmetic result
// is truncated at the common order; mixing orders truncates to the smaller one.
class SeriesJet {
 public:
  SeriesJet() : coeffs_(1, cplx(0.0)) {}
  explicit SeriesJet(int order, cplx constant = 0.0);
  SeriesJet(std::vector<cplx> coeffs);

  static SeriesJet constant(int order, cplx value) { return SeriesJet(order, value); }
  /// The series a + b x.
  static SeriesJet linear(int order, cplx a, cplx b);

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  cplx operator[](int i) const { return coeffs_[static_cast<std::size_t>(i)]; }
  cplx& operator[](int i) { return coeffs_[static_cast<std::size_t>(i)]; }

  /// Horner evaluation of the truncated polynomial.
  cplx evaluate(cplx x) const;

  SeriesJet truncated(int order) const;
  /// Multiplicative inverse; requires a nonzero constant term.
  SeriesJet reciprocal() const;

  SeriesJet& operator+=(const SeriesJet& other);
  SeriesJet& operator-=(const SeriesJet& other);
  SeriesJet& operator*=(const SeriesJet& other);
  SeriesJet& operator*=(cplx s);

  friend SeriesJet operator+(SeriesJet a, const SeriesJet& b) { return a += b; }
  friend SeriesJet operator-(SeriesJet a, const SeriesJet& b) { return a -= b; }
  friend SeriesJet operator*(SeriesJet a, const SeriesJet& b) { return a *= b; }
  friend SeriesJet operator*(SeriesJet a, cplx s) { return a *= s; }
  friend SeriesJet operator*(cplx s, SeriesJet a) { return a *= s; }
  friend SeriesJet operator/(const SeriesJet& a, const SeriesJet& b) { return a * b.reciprocal(); }
  SeriesJet operator-() const { return *this * cplx(-1.0); }

 private:
  std::vector<cplx> coeffs_;
};

}  // namespace qkm
