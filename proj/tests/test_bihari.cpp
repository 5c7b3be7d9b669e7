#include "nsfde/bihari.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "nsfde/errors.hpp"
#include "nsfde/quadrature.hpp"
#include "support/oracles.hpp"

using namespace nsfde;
using bihari::ConcaveModulus;

TEST_CASE("gronwall textbook cases") {
  TimeGrid grid(1.0, 50);
  std::vector<double> ones(grid.n_nodes(), 1.0);
  std::vector<double> zeros(grid.n_nodes(), 0.0);

  const auto exp_bound = bihari::gronwall_bound(ones, ones, grid);
  for (int k = 0; k < grid.n_nodes(); ++k)
    CHECK(exp_bound[k] == doctest::Approx(std::exp(grid.node(k))).epsilon(1e-3));

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> h(grid.n_nodes());
  for (double& v : h) v = u(gen);
  const auto flat = bihari::gronwall_bound(h, zeros, grid);
  double running = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    running = std::max(running, h[k]);
    CHECK(flat[k] == doctest::Approx(running));
  }

  // h(t) = t increasing, lambda = 1: bound(t) = t e^t
  std::vector<double> ramp(grid.n_nodes());
  for (int k = 0; k < grid.n_nodes(); ++k) ramp[k] = grid.node(k);
  const auto te = bihari::gronwall_bound(ramp, ones, grid);
  for (int k = 0; k < grid.n_nodes(); ++k)
    CHECK(te[k] == doctest::Approx(grid.node(k) * std::exp(grid.node(k))).epsilon(1e-3));
}

TEST_CASE("bihari with linear modulus reduces to gronwall") {
  TimeGrid grid(1.0, 24);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.05, 1.5);
  const ConcaveModulus rho = ConcaveModulus::linear(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> h(grid.n_nodes()), lam(grid.n_nodes());
    for (double& v : h) v = u(gen);
    for (double& v : lam) v = u(gen);
    const auto gron = bihari::gronwall_bound(h, lam, grid);
    const auto biha = bihari::bihari_bound(h, lam, rho, 1e-3, grid);
    for (int k = 0; k < grid.n_nodes(); ++k)
      CHECK(biha[k] == doctest::Approx(gron[k]).epsilon(1e-8));
  }
}

TEST_CASE("bihari bound is invariant in x0") {
  TimeGrid grid(1.0, 16);
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> h(grid.n_nodes()), lam(grid.n_nodes());
  for (double& v : h) v = u(gen);
  for (double& v : lam) v = u(gen);
  for (const ConcaveModulus& rho :
       {ConcaveModulus::linear(0.8), ConcaveModulus::log_splice(0.2), ConcaveModulus::power(0.5)}) {
    const auto a = bihari::bihari_bound(h, lam, rho, 1e-6, grid);
    const auto b = bihari::bihari_bound(h, lam, rho, 1e-3, grid);
    const auto c = bihari::bihari_bound(h, lam, rho, 1.0, grid);
    for (int k = 0; k < grid.n_nodes(); ++k) {
      CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-8));
      CHECK(b[k] == doctest::Approx(c[k]).epsilon(1e-8));
    }
  }
}

TEST_CASE("bihari degenerate inputs") {
  TimeGrid grid(1.0, 8);
  std::vector<double> h(grid.n_nodes(), 0.5);
  std::vector<double> zeros(grid.n_nodes(), 0.0);

  // lambda = 0: G^{-1}(G(h*)) = h*
  const auto flat = bihari::bihari_bound(h, zeros, ConcaveModulus::log_splice(0.1), 0.01, grid);
  for (double v : flat) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));

  CHECK_THROWS_AS(bihari::bihari_bound(h, zeros, ConcaveModulus::zero(), 0.01, grid),
                  std::domain_error);
  CHECK_THROWS_AS(bihari::bihari_bound(h, zeros, ConcaveModulus::linear(1.0), -1.0, grid),
                  std::domain_error);
}

TEST_CASE("bihari log modulus: finite bound checked against the fixed-point oracle") {
  TimeGrid grid(1.0, 64);
  const ConcaveModulus rho = ConcaveModulus::log_splice(0.2);
  std::vector<double> h(grid.n_nodes(), 0.01);
  std::vector<double> lam(grid.n_nodes(), 1.0);
  const auto bound = bihari::bihari_bound(h, lam, rho, 1e-4, grid);
  for (double v : bound) CHECK(std::isfinite(v));

  const auto oracle = oracles::integral_equation_fixed_point(
      h, lam, grid.dt(), [&rho](double u) { return rho(u); });
  // with constant h the bound solves the equality version of the inequality,
  // so the two routes agree up to the oracle's trapezoid error (O(dt^2))
  for (int k = 0; k < grid.n_nodes(); ++k)
    CHECK(bound[k] == doctest::Approx(oracle[k]).epsilon(2e-3));
}

TEST_CASE("bihari bound is monotone in its curve inputs") {
  TimeGrid grid(1.0, 12);
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> u(0.05, 0.8);
  const ConcaveModulus rho = ConcaveModulus::power(0.6);
  std::vector<double> h(grid.n_nodes()), lam(grid.n_nodes());
  for (double& v : h) v = u(gen);
  for (double& v : lam) v = u(gen);
  std::vector<double> h_big(h), lam_big(lam);
  for (double& v : h_big) v += 0.3;
  for (double& v : lam_big) v += 0.4;

  const auto base = bihari::bihari_bound(h, lam, rho, 0.01, grid);
  const auto bigger_h = bihari::bihari_bound(h_big, lam, rho, 0.01, grid);
  const auto bigger_l = bihari::bihari_bound(h, lam_big, rho, 0.01, grid);
  for (int k = 0; k < grid.n_nodes(); ++k) {
    CHECK(bigger_h[k] >= base[k] - 1e-10);
    CHECK(bigger_l[k] >= base[k] - 1e-10);
  }
}

TEST_CASE("modulus_check registry rows") {
  SUBCASE("linear modulus passes everything") {
    const auto rows = bihari::modulus_check(ConcaveModulus::linear(2.0));
    for (const auto& row : rows) CHECK(row.pass);
  }
  SUBCASE("log splice: continuity, concavity, divergence pattern") {
    const auto rows = bihari::modulus_check(ConcaveModulus::log_splice(0.1));
    for (const auto& row : rows) CHECK(row.pass);
  }
  SUBCASE("power modulus is concave but not divergent") {
    const auto rows = bihari::modulus_check(ConcaveModulus::power(0.5));
    for (const auto& row : rows) {
      if (row.name == "integral_divergence")
        CHECK_FALSE(row.pass);
      else
        CHECK(row.pass);
    }
  }
}

TEST_CASE("log modulus divergence integral matches the double-log closed form") {
  // \int_eps^delta dy / (y log(1/y)) = loglog(1/eps) - loglog(1/delta)
  const double delta = 0.2;
  const ConcaveModulus rho = ConcaveModulus::log_splice(delta);
  double prev = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double got =
        quad::adaptive_simpson([&rho](double y) { return 1.0 / rho(y); }, eps, delta, 1e-11);
    const double expected = std::log(std::log(1.0 / eps)) - std::log(std::log(1.0 / delta));
    CHECK(got == doctest::Approx(expected).epsilon(1e-7));
    CHECK(got > prev);  // monotone growth as eps shrinks
    prev = got;
  }
}

TEST_CASE("modulus parameter validation") {
  CHECK_THROWS(ConcaveModulus::log_splice(0.5));  // delta >= 1/e
  CHECK_THROWS(ConcaveModulus::power(1.0));
  CHECK_THROWS(ConcaveModulus::power(0.0));
  CHECK_THROWS(ConcaveModulus::linear(-1.0));
}
