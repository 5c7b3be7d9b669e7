#include "nsfde/semigroup.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "nsfde/errors.hpp"

using namespace nsfde;
using semigroup::FracPower;
using semigroup::PowerSign;
using semigroup::SpectralGenerator;

TEST_CASE("generator validation") {
  CHECK_THROWS(SpectralGenerator({0.0, 1.0}));
  CHECK_THROWS(SpectralGenerator({2.0, 1.0}));
  CHECK_THROWS(SpectralGenerator({}));
  const SpectralGenerator gen = SpectralGenerator::laplacian_dirichlet(4);
  CHECK(gen.mu(0) == 1.0);
  CHECK(gen.mu(3) == 16.0);
}

TEST_CASE("apply_semigroup") {
  const SpectralGenerator gen = SpectralGenerator::laplacian_dirichlet(4);
  const std::vector<double> v = {1.0, -2.0, 0.5, 3.0};
  CHECK(apply_semigroup(gen, 0.0, v) == v);
  CHECK_THROWS_AS(apply_semigroup(gen, -0.1, v), std::domain_error);

  // spectral mapping on the first basis vector: T(t) e_1 = e^{-t} e_1
  std::vector<double> e1 = {1.0, 0.0, 0.0, 0.0};
  const auto mapped = apply_semigroup(gen, 0.7, e1);
  CHECK(mapped[0] == doctest::Approx(std::exp(-0.7)).epsilon(1e-15));
  CHECK(mapped[1] == 0.0);

  // contraction (M = 1) on random vectors and times
  std::mt19937_64 rg(3);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> tu(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> w(4);
    for (double& x : w) x = z(rg);
    const double t = tu(rg);
    const auto tw = apply_semigroup(gen, t, w);
    double n0 = 0.0, n1 = 0.0;
    for (int i = 0; i < 4; ++i) {
      n0 += w[i] * w[i];
      n1 += tw[i] * tw[i];
    }
    CHECK(n1 <= n0 + 1e-15);
  }
}

TEST_CASE("semigroup law and commutation with fractional powers") {
  const SpectralGenerator gen = SpectralGenerator::laplacian_dirichlet(5);
  std::vector<double> v = {0.3, -1.2, 0.8, 2.0, -0.1};
  const auto both = apply_semigroup(gen, 0.9, v);
  const auto stepped = apply_semigroup(gen, 0.5, apply_semigroup(gen, 0.4, v));
  for (int i = 0; i < 5; ++i) CHECK(both[i] == doctest::Approx(stepped[i]).epsilon(1e-14));

  FracPower p(0.6);
  const auto a = apply_frac_power(gen, p, PowerSign::plus, apply_semigroup(gen, 0.3, v));
  const auto b = apply_semigroup(gen, 0.3, apply_frac_power(gen, p, PowerSign::plus, v));
  for (int i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("fractional powers") {
  const SpectralGenerator gen = SpectralGenerator::laplacian_dirichlet(4);
  CHECK_THROWS_AS(FracPower(0.0), std::domain_error);
  CHECK_THROWS_AS(FracPower(1.5), std::domain_error);

  std::vector<double> v = {1.0, 1.0, 1.0, 1.0};
  const auto av = apply_frac_power(gen, FracPower(1.0), PowerSign::plus, v);
  for (int n = 0; n < 4; ++n) CHECK(av[n] == doctest::Approx((n + 1.0) * (n + 1.0)));

  // (-A)^{-beta} then (-A)^{beta} is the identity
  std::vector<double> w = {0.2, -3.0, 5.5, 1.0};
  const auto round =
      apply_frac_power(gen, FracPower(0.75), PowerSign::plus,
                       apply_frac_power(gen, FracPower(0.75), PowerSign::minus, w));
  for (int n = 0; n < 4; ++n) CHECK(round[n] == doctest::Approx(w[n]).epsilon(1e-14));

  CHECK(semigroup::neg_frac_power_norm(gen, 0.75) == doctest::Approx(1.0));
  const SpectralGenerator shifted(std::vector<double>{4.0, 9.0});
  CHECK(semigroup::neg_frac_power_norm(shifted, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("frac_power_semigroup_bound") {
  const SpectralGenerator gen = SpectralGenerator::laplacian_dirichlet(64);
  CHECK_THROWS_AS(semigroup::frac_power_semigroup_bound(gen, 0.75, 0.0), std::domain_error);

  SUBCASE("single mode is exact") {
    const SpectralGenerator one(std::vector<double>{3.0});
    const auto r = semigroup::frac_power_semigroup_bound(one, 0.8, 0.4);
    CHECK(r.norm == doctest::Approx(std::pow(3.0, 0.2) * std::exp(-3.0 * 0.4)).epsilon(1e-15));
    CHECK(r.norm <= r.bound);
  }

  SUBCASE("1000-point log sweep stays under the sharp envelope") {
    for (double beta : {0.6, 0.75, 0.9}) {
      for (int i = 0; i < 1000; ++i) {
        const double t = std::pow(10.0, -3.0 + 3.0 * i / 999.0);
        const auto r = semigroup::frac_power_semigroup_bound(gen, beta, t);
        CHECK(r.norm <= r.bound);  // exact inequality, no tolerance
      }
    }
  }

  SUBCASE("beta near 1 collapses to the plain semigroup norm") {
    const auto r = semigroup::frac_power_semigroup_bound(gen, 0.999, 0.5);
    CHECK(r.norm == doctest::Approx(std::pow(1.0, 0.001) * std::exp(-0.5)).epsilon(1e-3));
    CHECK(r.norm <= 1.0);
  }
}
