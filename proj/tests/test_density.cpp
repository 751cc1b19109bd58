#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "chainlab/density.hpp"
#include "chainlab/errors.hpp"
#include "chainlab/geometry.hpp"

using namespace chainlab;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec rates2(double a, double b) { return v2(a, b); }

const ConvexBody& unit_box() {
  static const ConvexBody box = ConvexBody::box(v2(0.0, 0.0), v2(1.0, 1.0));
  return box;
}

}  // namespace

TEST_CASE("built-in density values") {
  const Density u = Density::uniform();
  CHECK_EQ(u(v2(0.3, 0.9)), doctest::Approx(1.0));

  const Density e = Density::product_exponential(rates2(1.0, 0.5));
  CHECK_EQ(e(v2(0.5, 0.5)), doctest::Approx(std::exp(-0.75)).epsilon(1e-15));

  const Density g = Density::truncated_gaussian(0.8);
  CHECK_EQ(g(v2(0.5, 0.5)), doctest::Approx(std::exp(-0.25 / 0.64)).epsilon(1e-15));
}

TEST_CASE("analytic sup bounds are sharp on boxes") {
  CHECK_EQ(Density::uniform().sup_bound(unit_box()), doctest::Approx(1.0));
  // exponential decreases away from the corner minimizing <r, x>
  CHECK_EQ(Density::product_exponential(rates2(1.0, 0.5)).sup_bound(unit_box()),
           doctest::Approx(1.0).epsilon(1e-15));
  const ConvexBody shifted = ConvexBody::box(v2(1.0, 1.0), v2(2.0, 2.0));
  CHECK_EQ(Density::truncated_gaussian(0.8).sup_bound(shifted),
           doctest::Approx(std::exp(-2.0 / 1.28)).epsilon(1e-14));

  Rng rng(5);
  CHECK_EQ(Density::product_exponential(rates2(1.0, 0.5)).validate_sup_bound(unit_box(), rng), 0);
}

TEST_CASE("custom density guards") {
  CHECK_THROWS_AS(Density::custom(nullptr, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Density::custom([](const Vec&) { return 1.0; }, 0.0), std::invalid_argument);

  const Density bad_nan =
      Density::custom([](const Vec&) { return std::nan(""); }, 1.0);
  CHECK_THROWS_AS(bad_nan(v2(0.5, 0.5)), NumericError);
  const Density bad_neg = Density::custom([](const Vec&) { return -1.0; }, 1.0);
  CHECK_THROWS_AS(bad_neg(v2(0.5, 0.5)), std::domain_error);
}

TEST_CASE("uniform chord weight equals chord length") {
  const Density u = Density::uniform();
  ChordSlice slice = chord_weight(u, unit_box(), v2(0.5, 0.5), v2(1.0, 0.0));
  CHECK_EQ(slice.weight, doctest::Approx(1.0).epsilon(1e-13));
  CHECK_EQ(slice.interval.lo, doctest::Approx(-0.5).epsilon(1e-14));
  CHECK_EQ(slice.interval.hi, doctest::Approx(0.5).epsilon(1e-14));

  // cdf table is monotone and spans [0, weight]
  REQUIRE(slice.cdf_table.size() >= 2);
  CHECK_EQ(slice.cdf_table.front().cum, doctest::Approx(0.0));
  CHECK_EQ(slice.cdf_table.back().cum, doctest::Approx(slice.weight).epsilon(1e-13));
  for (std::size_t k = 1; k < slice.cdf_table.size(); ++k) {
    CHECK(slice.cdf_table[k].s > slice.cdf_table[k - 1].s);
    CHECK(slice.cdf_table[k].cum >= slice.cdf_table[k - 1].cum);
  }
}

TEST_CASE("exponential chord weight matches the closed form") {
  const Density e = Density::product_exponential(rates2(1.0, 0.5));
  ChordSlice slice = chord_weight(e, unit_box(), v2(0.5, 0.5), v2(1.0, 0.0));
  // integral of exp(-(0.5+s)-0.25) over [-1/2, 1/2] = 2 sinh(1/2) exp(-3/4)
  CHECK_EQ(slice.weight, doctest::Approx(0.49229598621121479).epsilon(1e-11));
}

TEST_CASE("gaussian chord weight matches a Riemann oracle") {
  const Density g = Density::truncated_gaussian(0.8);
  ChordSlice slice = chord_weight(g, unit_box(), v2(0.5, 0.5), v2(1.0, 0.0));
  // midpoint rule, 2e6 nodes, frozen
  CHECK_EQ(slice.weight, doctest::Approx(0.65048737894028053).epsilon(1e-10));
}

TEST_CASE("inverse CDF on a uniform chord is linear") {
  const Density u = Density::uniform();
  ChordSlice slice = chord_weight(u, unit_box(), v2(0.5, 0.5), v2(1.0, 0.0));
  CHECK_EQ(sample_chord_s(slice, 0.0), doctest::Approx(-0.5).epsilon(1e-10));
  CHECK_EQ(sample_chord_s(slice, 0.25), doctest::Approx(-0.25).epsilon(1e-9));
  CHECK_EQ(sample_chord_s(slice, 1.0), doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("inverse CDF median of an exponential chord") {
  const Density e = Density::product_exponential(rates2(1.0, 0.5));
  ChordSlice slice = chord_weight(e, unit_box(), v2(0.5, 0.5), v2(1.0, 0.0));
  // solve (exp(1/2) - exp(-s))/(2 sinh(1/2)) = 1/2  =>  s = -log(cosh(1/2))
  CHECK_EQ(sample_chord_s(slice, 0.5), doctest::Approx(-0.12011450695827745).epsilon(1e-8));

  double prev = -0.5;
  for (int k = 1; k <= 20; ++k) {
    const double s = sample_chord_s(slice, k / 20.0);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("chord sampling matches its own CDF (KS test)") {
  const Density g = Density::truncated_gaussian(0.6);
  ChordSlice slice = chord_weight(g, unit_box(), v2(0.3, 0.5), v2(1.0, 0.0));

  // independent quadrature: fine midpoint CDF of rho along the chord
  const int M = 1 << 16;
  const double lo = slice.interval.lo, len = slice.interval.length();
  std::vector<double> cdf(M + 1, 0.0);
  const Vec x0 = slice.origin;
  const Vec dir = slice.direction;
  long double acc = 0.0L;
  const double h = len / M;
  for (int k = 0; k < M; ++k) {
    const double s = lo + (k + 0.5) * h;
    acc += static_cast<long double>(g(x0 + s * dir)) * h;
    cdf[k + 1] = static_cast<double>(acc);
  }
  const double total = cdf[M];
  auto cdf_at = [&](double s) {
    const double t = (s - lo) / h;
    const int k = std::min(M - 1, std::max(0, static_cast<int>(t)));
    const double frac = t - k;
    return (cdf[k] + frac * (cdf[k + 1] - cdf[k])) / total;
  };

  Rng rng(2024);
  const int N = 10000;
  std::vector<double> u(N);
  for (int k = 0; k < N; ++k) {
    const Vec y = sample_chord(slice, rng);
    u[k] = cdf_at((y - x0).dot(dir));
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (int k = 0; k < N; ++k) {
    ks = std::max(ks, std::abs(u[k] - (k + 1.0) / N));
    ks = std::max(ks, std::abs(u[k] - static_cast<double>(k) / N));
  }
  CHECK(ks < 1.6276 / std::sqrt(static_cast<double>(N)));  // 1% level
}

TEST_CASE("vanishing chord weight is an error") {
  const Density tiny = Density::custom([](const Vec&) { return 1e-308; }, 1.0);
  CHECK_THROWS_AS(chord_weight(tiny, unit_box(), v2(0.5, 0.5), v2(1.0, 0.0)),
                  std::domain_error);
}

TEST_CASE("level-set membership") {
  const Density g = Density::truncated_gaussian(0.8);
  const Vec x = v2(0.5, 0.5);
  const double rho_x = g(x);
  CHECK(in_level_set(g, unit_box(), rho_x * 0.99, x));
  CHECK_FALSE(in_level_set(g, unit_box(), rho_x * 1.01, x));
  CHECK(in_level_set(g, unit_box(), 0.0, x));  // bounded body, so t = 0 is allowed
  CHECK_FALSE(in_level_set(g, unit_box(), 0.5, v2(2.0, 0.5)));  // outside the body
  CHECK_THROWS_AS(in_level_set(g, unit_box(), -0.1, x), std::domain_error);
}
