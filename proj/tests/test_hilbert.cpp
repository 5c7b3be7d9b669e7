#include "nsfde/hilbert.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "nsfde/stats.hpp"

using namespace nsfde;
using hilbert::HSOperator;
using hilbert::TraceClassQ;

TEST_CASE("trace_q values") {
  SUBCASE("power-law partial sum and tail") {
    TraceClassQ q = TraceClassQ::power_law(1000, 1.0, 2.0);
    CHECK(trace_q(q) == doctest::Approx(1.643935).epsilon(1e-6));
    CHECK(q.tail_bound() == doctest::Approx(1e-3).epsilon(1e-12));
    // the full series is pi^2/6; partial sum + tail bound brackets it
    CHECK(trace_q(q) + q.tail_bound() >= M_PI * M_PI / 6.0);
  }
  SUBCASE("degenerate spectra") {
    CHECK(trace_q(TraceClassQ({0.0, 0.0, 0.0})) == 0.0);
    CHECK(trace_q(TraceClassQ({1.0})) == 1.0);
  }
  SUBCASE("truncation monotonicity") {
    double prev = 0.0;
    for (int n : {1, 4, 16, 64}) {
      const double t = trace_q(TraceClassQ::power_law(n, 1.0, 2.0));
      CHECK(t >= prev);
      prev = t;
    }
  }
  CHECK_THROWS(TraceClassQ({-1.0}));
  CHECK_THROWS(TraceClassQ::power_law(4, 1.0, 1.0));  // infinite trace
}

TEST_CASE("hs_norm closed forms") {
  TraceClassQ q({0.9, 0.4, 0.2, 0.05});
  CHECK(hs_norm(HSOperator::identity(4), q) == doctest::Approx(std::sqrt(trace_q(q))));
  CHECK(hs_norm(HSOperator::zero(4), q) == 0.0);

  HSOperator single = HSOperator::zero(4);
  single.at(2, 1) = -3.5;
  CHECK(hs_norm(single, q) == doctest::Approx(3.5 * std::sqrt(0.4)).epsilon(1e-14));

  CHECK_THROWS(hs_norm(HSOperator::identity(3), q));
}

TEST_CASE("hs_norm is a norm (homogeneity, triangle)") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  TraceClassQ q = TraceClassQ::power_law(5, 1.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    HSOperator a = HSOperator::zero(5), b = HSOperator::zero(5);
    for (double& v : a.m) v = z(gen);
    for (double& v : b.m) v = z(gen);
    const double c = scale(gen);
    HSOperator ca = a;
    for (double& v : ca.m) v *= c;
    CHECK(hs_norm(ca, q) == doctest::Approx(std::abs(c) * hs_norm(a, q)).epsilon(1e-12));
    HSOperator sum = a;
    for (std::size_t i = 0; i < sum.m.size(); ++i) sum.m[i] += b.m[i];
    CHECK(hs_norm(sum, q) <= hs_norm(a, q) + hs_norm(b, q) + 1e-12);
  }
}

TEST_CASE("sample_qfbm reduces to scalar fBm for N = 1") {
  fbm::Hurst h(0.75);
  TimeGrid grid(1.0, 16);
  TraceClassQ q({1.0});
  const auto qpaths = hilbert::sample_qfbm(grid, h, q, 6, 99);
  const auto spaths = fbm::sample_cholesky(fbm::CovMatrix::build(grid, h), 6, 99);
  for (int p = 0; p < 6; ++p)
    for (int k = 0; k < grid.n_nodes(); ++k)
      CHECK(qpaths.coeff(p, k, 0) == spaths[p].values[k]);
}

TEST_CASE("sample_qfbm mode covariance structure") {
  fbm::Hurst h(0.75);
  TimeGrid grid(1.0, 8);
  TraceClassQ q = TraceClassQ::power_law(3, 1.0, 2.0);
  const int n_paths = 4000;
  const auto paths = hilbert::sample_qfbm(grid, h, q, n_paths, 1234);

  const int ks = 4, kt = 8;
  const double r = fbm::covariance_rh(grid.node(ks), grid.node(kt), h);
  std::vector<double> prod(n_paths);

  SUBCASE("E<B(t),e_n><B(s),e_n> = R(s,t) lambda_n") {
    for (int n = 0; n < 3; ++n) {
      for (int p = 0; p < n_paths; ++p)
        prod[p] = paths.coeff(p, ks, n) * paths.coeff(p, kt, n);
      const double est = stats::mean(prod);
      const double se = stats::jackknife_se(prod);
      CHECK(std::abs(est - r * q.eigenvalue(n)) <= 5.0 * se);
    }
  }
  SUBCASE("cross-mode covariance vanishes") {
    for (int p = 0; p < n_paths; ++p)
      prod[p] = paths.coeff(p, ks, 0) * paths.coeff(p, kt, 1);
    CHECK(std::abs(stats::mean(prod)) <= 5.0 * stats::jackknife_se(prod));
    for (int p = 0; p < n_paths; ++p)
      prod[p] = paths.coeff(p, kt, 1) * paths.coeff(p, ks, 2);
    CHECK(std::abs(stats::mean(prod)) <= 5.0 * stats::jackknife_se(prod));
  }
}
