#include "nsfde/wiener.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "nsfde/stats.hpp"

using namespace nsfde;
using wiener::OperatorStepFunction;
using wiener::StepFunction;

namespace {

StepFunction random_step(std::mt19937_64& gen, double t_end, int cells) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> breaks(cells + 1), vals(cells);
  for (int i = 0; i <= cells; ++i) breaks[i] = t_end * i / cells;
  for (double& v : vals) v = u(gen);
  return StepFunction(breaks, vals);
}

}  // namespace

TEST_CASE("khstar boundary behaviour") {
  fbm::Hurst h(0.75);
  StepFunction zero({0.0, 1.0}, {0.0});
  CHECK(wiener::khstar_apply(zero, 0.3, h) == 0.0);
  StepFunction one = StepFunction::indicator(1.0, 1.0);
  CHECK(wiener::khstar_apply(one, 1.0, h) == 0.0);
  CHECK(wiener::khstar_apply(one, 1.5, h) == 0.0);
  CHECK_THROWS_AS(wiener::khstar_apply(one, 0.0, h), std::domain_error);
}

TEST_CASE("khstar on indicators reproduces the kernel") {
  // (K_H^* 1_{[0,T]})(s) = \int_s^T dK/dr(r, s) dr = K_H(T, s)
  for (double hv : {0.6, 0.75, 0.9}) {
    fbm::Hurst h(hv);
    StepFunction one = StepFunction::indicator(1.0, 1.0);
    for (double s : {0.1, 0.37, 0.8}) {
      CHECK(wiener::khstar_apply(one, s, h) ==
            doctest::Approx(fbm::kernel_kh(1.0, s, h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("kernel derivative in its upper argument matches the khstar weight") {
  // dK/dr(r,s) = c_H s^{1/2-H} (r-s)^{H-3/2} r^{H-1/2}, derived analytically;
  // cross-checked against a central difference of kernel_kh.
  fbm::Hurst h(0.7);
  const double s = 0.4, r = 0.9, eps = 1e-6;
  const double numeric =
      (fbm::kernel_kh(r + eps, s, h) - fbm::kernel_kh(r - eps, s, h)) / (2.0 * eps);
  const double closed = fbm::c_h(h) * std::pow(s, 0.5 - 0.7) * std::pow(r - s, 0.7 - 1.5) *
                        std::pow(r, 0.7 - 0.5);
  CHECK(numeric == doctest::Approx(closed).epsilon(1e-6));
}

TEST_CASE("scalar product closed forms") {
  fbm::Hurst h(0.75);
  const double t_end = 1.3;
  StepFunction one({0.0, t_end}, {1.0});
  CHECK(wiener::scalar_product_h(one, one, h) ==
        doctest::Approx(std::pow(t_end, h.two_h())).epsilon(1e-13));

  StepFunction zero({0.0, t_end}, {0.0});
  std::mt19937_64 gen(17);
  StepFunction psi = random_step(gen, t_end, 7);
  CHECK(wiener::scalar_product_h(psi, zero, h) == 0.0);
}

TEST_CASE("indicator scalar products reproduce R_H") {
  for (double hv : {0.6, 0.75, 0.9}) {
    fbm::Hurst h(hv);
    const double t_end = 1.0;
    for (int a = 1; a <= 5; ++a) {
      for (int b = 1; b <= 5; ++b) {
        const double t = 0.2 * a, s = 0.2 * b;
        const double got = wiener::scalar_product_h(StepFunction::indicator(t, t_end),
                                                    StepFunction::indicator(s, t_end), h);
        CHECK(got == doctest::Approx(fbm::covariance_rh(t, s, h)).epsilon(1e-8));
      }
    }
  }
  // the spec's spot value
  fbm::Hurst h(0.75);
  CHECK(wiener::scalar_product_h(StepFunction::indicator(0.5, 1.0),
                                 StepFunction::indicator(1.0, 1.0), h) ==
        doctest::Approx(fbm::covariance_rh(0.5, 1.0, h)).epsilon(1e-8));
}

TEST_CASE("scalar product bilinearity and symmetry") {
  fbm::Hurst h(0.8);
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 30; ++trial) {
    StepFunction a = random_step(gen, 1.0, 5);
    StepFunction b = random_step(gen, 1.0, 8);
    StepFunction c = random_step(gen, 1.0, 8);
    const double ab = wiener::scalar_product_h(a, b, h);
    CHECK(ab == doctest::Approx(wiener::scalar_product_h(b, a, h)).epsilon(1e-12));
    // linearity in the second slot: <a, b + 2c> = <a,b> + 2<a,c>
    std::vector<double> mixed(b.values());
    for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] += 2.0 * c.values()[i];
    const double lhs = wiener::scalar_product_h(a, StepFunction(b.breaks(), mixed), h);
    CHECK(lhs == doctest::Approx(ab + 2.0 * wiener::scalar_product_h(a, c, h))
                     .epsilon(1e-10));
  }
}

TEST_CASE("abs-H norm and the Lemma 1 chain") {
  std::mt19937_64 gen(31);
  for (double hv : {0.6, 0.75, 0.9}) {
    fbm::Hurst h(hv);
    for (int trial = 0; trial < 100; ++trial) {
      StepFunction psi = random_step(gen, 1.0, 1 + trial % 12);
      const double norm_sq = wiener::norm_abs_h_sq(psi, h);
      // nonnegative psi: |psi| = psi so the two quadratic forms agree
      std::vector<double> abs_vals(psi.values());
      for (double& v : abs_vals) v = std::abs(v);
      StepFunction abs_psi(psi.breaks(), abs_vals);
      CHECK(norm_sq ==
            doctest::Approx(wiener::scalar_product_h(abs_psi, abs_psi, h)).epsilon(1e-12));
      // ||psi||^2_{|H|} <= 2 H T^{2H-1} \int |psi|^2
      CHECK(norm_sq <= 2.0 * hv * std::pow(1.0, hv * 2.0 - 1.0) * psi.l2_norm_sq() + 1e-12);
    }
  }
  fbm::Hurst h(0.75);
  StepFunction one({0.0, 1.0}, {1.0});
  CHECK(wiener::norm_abs_h_sq(one, h) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("integrate_wiener telescopes for the identity integrand") {
  fbm::Hurst h(0.75);
  TimeGrid grid(1.0, 16);
  hilbert::TraceClassQ q({1.0});
  const auto paths = hilbert::sample_qfbm(grid, h, q, 5, 7);
  OperatorStepFunction psi(grid, std::vector<hilbert::HSOperator>(
                                     grid.n_steps(), hilbert::HSOperator::identity(1)));
  for (int k : {0, 7, 16}) {
    const auto ints = wiener::integrate_wiener(psi, paths, k);
    for (int p = 0; p < 5; ++p)
      CHECK(ints[p][0] == doctest::Approx(paths.coeff(p, k, 0)).epsilon(1e-14));
  }
  CHECK_THROWS(wiener::integrate_wiener(psi, paths, 17));
  CHECK_THROWS(wiener::integrate_wiener(psi, paths, -1));

  OperatorStepFunction zero(grid, std::vector<hilbert::HSOperator>(
                                      grid.n_steps(), hilbert::HSOperator::zero(1)));
  const auto zs = wiener::integrate_wiener(zero, paths, 16);
  for (const auto& v : zs) CHECK(v[0] == 0.0);
}

TEST_CASE("wiener integral second moment and isometry") {
  fbm::Hurst h(0.75);
  TimeGrid grid(1.0, 32);
  hilbert::TraceClassQ q({1.0});
  const int n_paths = 4000;
  const auto paths = hilbert::sample_qfbm(grid, h, q, n_paths, 41);

  // E (\int_0^T 1 dB^H)^2 = T^{2H}
  OperatorStepFunction one(grid, std::vector<hilbert::HSOperator>(
                                     grid.n_steps(), hilbert::HSOperator::identity(1)));
  const auto ints = wiener::integrate_wiener(one, paths, grid.n_steps());
  std::vector<double> sq(n_paths);
  for (int p = 0; p < n_paths; ++p) sq[p] = ints[p][0] * ints[p][0];
  CHECK(std::abs(stats::mean(sq) - 1.0) <= 5.0 * stats::jackknife_se(sq));

  // E[beta^H(phi) beta^H(psi)] = <phi, psi>_H for step functions
  std::vector<double> phi_vals(grid.n_steps()), psi_vals(grid.n_steps());
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : phi_vals) v = u(gen);
  for (auto& v : psi_vals) v = u(gen);
  auto as_ops = [&](const std::vector<double>& vals) {
    std::vector<hilbert::HSOperator> ops;
    for (double v : vals) ops.push_back(hilbert::HSOperator::scaled_identity(1, v));
    return OperatorStepFunction(grid, ops);
  };
  const auto iphi = wiener::integrate_wiener(as_ops(phi_vals), paths, grid.n_steps());
  const auto ipsi = wiener::integrate_wiener(as_ops(psi_vals), paths, grid.n_steps());
  std::vector<double> prod(n_paths);
  for (int p = 0; p < n_paths; ++p) prod[p] = iphi[p][0] * ipsi[p][0];
  const double expected = wiener::scalar_product_h(
      StepFunction::on_grid(grid, phi_vals), StepFunction::on_grid(grid, psi_vals), h);
  CHECK(std::abs(stats::mean(prod) - expected) <=
        5.0 * stats::jackknife_se(prod) + 0.02 * std::abs(expected));
}

TEST_CASE("both integral routes produce the same second moment") {
  // forward Riemann-Stieltjes sums against beta^H versus the K_H^* transfer
  // route against plain Brownian increments
  fbm::Hurst h(0.75);
  TimeGrid grid(1.0, 32);
  StepFunction phi({0.0, 0.4, 1.0}, {1.0, -0.5});
  const int n_paths = 6000;

  const auto khstar_samples =
      wiener::integrate_wiener_scalar_khstar(phi, h, grid, n_paths, 55);
  std::vector<double> sq(n_paths);
  for (int p = 0; p < n_paths; ++p) sq[p] = khstar_samples[p] * khstar_samples[p];
  const double moment_khstar = stats::mean(sq);
  const double se_khstar = stats::jackknife_se(sq);

  const double exact = wiener::scalar_product_h(phi, phi, h);
  CHECK(std::abs(moment_khstar - exact) <= 5.0 * se_khstar + 0.05 * exact);

  hilbert::TraceClassQ q({1.0});
  const auto paths = hilbert::sample_qfbm(grid, h, q, n_paths, 56);
  std::vector<hilbert::HSOperator> ops;
  for (int j = 0; j < grid.n_steps(); ++j)
    ops.push_back(hilbert::HSOperator::scaled_identity(1, phi(grid.node(j))));
  const auto fwd = wiener::integrate_wiener(OperatorStepFunction(grid, ops), paths,
                                            grid.n_steps());
  for (int p = 0; p < n_paths; ++p) sq[p] = fwd[p][0] * fwd[p][0];
  const double moment_fwd = stats::mean(sq);
  CHECK(std::abs(moment_fwd - moment_khstar) <=
        5.0 * (se_khstar + stats::jackknife_se(sq)) + 0.05 * exact);
}

TEST_CASE("lemma2_certify") {
  fbm::Hurst h(0.75);
  TimeGrid grid(1.0, 16);

  SUBCASE("zero integrand: equality passes") {
    hilbert::TraceClassQ q = hilbert::TraceClassQ::power_law(3, 1.0, 2.0);
    OperatorStepFunction zero(grid, std::vector<hilbert::HSOperator>(
                                        grid.n_steps(), hilbert::HSOperator::zero(3)));
    const auto cert = wiener::lemma2_certify(zero, h, q, grid.n_steps(), 200, 1);
    CHECK(cert.lhs == 0.0);
    CHECK(cert.rhs == 0.0);
    CHECK(cert.pass);
  }

  SUBCASE("scalar constant integrand: lhs near t^{2H}, rhs = 2H t^{2H}") {
    hilbert::TraceClassQ q({1.0});
    OperatorStepFunction one(grid, std::vector<hilbert::HSOperator>(
                                       grid.n_steps(), hilbert::HSOperator::identity(1)));
    const auto cert = wiener::lemma2_certify(one, h, q, grid.n_steps(), 4000, 2);
    CHECK(cert.lhs == doctest::Approx(1.0).epsilon(0.1));
    CHECK(cert.rhs == doctest::Approx(2.0 * 0.75).epsilon(1e-12));
    CHECK(cert.pass);
  }

  SUBCASE("random operator fixtures across Hurst values") {
    std::mt19937_64 gen(64);
    std::normal_distribution<double> z(0.0, 0.7);
    hilbert::TraceClassQ q = hilbert::TraceClassQ::power_law(3, 1.0, 2.0);
    for (double hv : {0.6, 0.75, 0.9}) {
      std::vector<hilbert::HSOperator> ops;
      for (int j = 0; j < grid.n_steps(); ++j) {
        hilbert::HSOperator op = hilbert::HSOperator::zero(3);
        for (double& v : op.m) v = z(gen);
        ops.push_back(op);
      }
      const auto cert = wiener::lemma2_certify(OperatorStepFunction(grid, ops), fbm::Hurst(hv),
                                               q, grid.n_steps(), 2000, 3);
      CHECK(cert.pass);
    }
  }
}
