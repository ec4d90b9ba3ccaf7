#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qkm/series_jet.hpp"

using qkm::cplx;
using qkm::SeriesJet;

TEST_CASE("product matches schoolbook convolution") {
  const SeriesJet a(std::vector<cplx>{1.0, 2.0, 3.0, 4.0});
  const SeriesJet b(std::vector<cplx>{-1.0, 0.5, 0.0, 2.0});
  const SeriesJet p = a * b;
  for (int n = 0; n <= 3; ++n) {
    cplx expect = 0.0;
    for (int i = 0; i <= n; ++i) expect += a[i] * b[n - i];
    CHECK(std::abs(p[n] - expect) == 0.0);
  }
}

TEST_CASE("reciprocals of geometric series") {
  const SeriesJet one_minus_x = SeriesJet::linear(6, 1.0, -1.0);
  const SeriesJet inv = one_minus_x.reciprocal();
  for (int n = 0; n <= 6; ++n) CHECK(inv[n] == cplx(1.0));

  // 1 / (1 + x)^2 = sum (-1)^n (n + 1) x^n
  const SeriesJet sq = SeriesJet::linear(6, 1.0, 1.0) * SeriesJet::linear(6, 1.0, 1.0);
  const SeriesJet r = sq.reciprocal();
  for (int n = 0; n <= 6; ++n) CHECK(r[n].real() == doctest::Approx((n % 2 ? -1.0 : 1.0) * (n + 1)));
}

TEST_CASE("division round trip") {
  const SeriesJet a(std::vector<cplx>{2.0, -1.0, 0.25, 3.0});
  const SeriesJet b(std::vector<cplx>{1.5, 0.5, -2.0, 1.0});
  const SeriesJet q = (a / b) * b;
  for (int n = 0; n <= 3; ++n) CHECK(std::abs(q[n] - a[n]) < 1e-14);
}

TEST_CASE("mixed orders truncate to the smaller order") {
  const SeriesJet a(5, 1.0);
  const SeriesJet b = SeriesJet::linear(2, 1.0, 1.0);
  CHECK((a + b).order() == 2);
  CHECK((a * b).order() == 2);
}

TEST_CASE("evaluate uses the truncated polynomial") {
  const SeriesJet a(std::vector<cplx>{1.0, 2.0, 3.0});
  CHECK(a.evaluate(2.0) == cplx(17.0));
  CHECK(a.truncated(1).evaluate(2.0) == cplx(5.0));
}

TEST_CASE("reciprocal needs a nonzero constant term") {
  CHECK_THROWS_AS(SeriesJet::linear(3, 0.0, 1.0).reciprocal(), qkm::Error);
}
