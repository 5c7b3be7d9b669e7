#include "nsfde/scenario.hpp"

#include <cmath>

#include "doctest.h"
#include "nsfde/errors.hpp"

using namespace nsfde;
using solver::DelayFunction;
using solver::Scenario;

TEST_CASE("config parser basics") {
  const auto kv = solver::parse_config_text(
      "# comment\n[model]\nhurst = 0.8\n t_end =2.5 # trailing\n\n[numerics]\nseed = 7\n");
  CHECK(kv.at("model.hurst") == "0.8");
  CHECK(kv.at("model.t_end") == "2.5");
  CHECK(kv.at("numerics.seed") == "7");

  CHECK_THROWS_AS(solver::parse_config_text("[model\nx=1\n"), ConfigError);
  CHECK_THROWS_AS(solver::parse_config_text("just a line\n"), ConfigError);
  CHECK_THROWS_AS(solver::parse_config_text("[m]\na=1\na=2\n"), ConfigError);
}

TEST_CASE("defaults round trip through the printed schema") {
  const Scenario printed = solver::scenario_from_config(
      solver::parse_config_text(solver::print_default_config()));
  const Scenario defaults = solver::default_scenario();
  CHECK(printed.h.value() == defaults.h.value());
  CHECK(printed.t_end == defaults.t_end);
  CHECK(printed.delay_r == defaults.delay_r);
  CHECK(printed.n_steps == defaults.n_steps);
  CHECK(printed.n_paths == defaults.n_paths);
  CHECK(printed.seed == defaults.seed);
  CHECK(printed.coeffs.f_kind() == defaults.coeffs.f_kind());
  CHECK(printed.coeffs.g_kappa() == defaults.coeffs.g_kappa());
  CHECK(printed.picard_tol == defaults.picard_tol);
  CHECK(printed.gen.n_modes() == defaults.gen.n_modes());
}

TEST_CASE("unknown keys are rejected by name") {
  auto kv = solver::parse_config_text("[model]\nhurst = 0.75\nhirst = 0.9\n");
  try {
    solver::scenario_from_config(kv);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("model.hirst") != std::string::npos);
  }
}

TEST_CASE("value validation") {
  CHECK_THROWS_AS(
      solver::scenario_from_config(solver::parse_config_text("[model]\nhurst = abc\n")),
      ConfigError);
  CHECK_THROWS_AS(
      solver::scenario_from_config(solver::parse_config_text("[numerics]\nn_steps = 0\n")),
      ConfigError);
  CHECK_THROWS_AS(
      solver::scenario_from_config(solver::parse_config_text("[model]\nbeta = 0.4\n")),
      ConfigError);
  CHECK_THROWS_AS(solver::scenario_from_config(
                      solver::parse_config_text("[coefficients]\nf = cubic\n")),
                  ConfigError);
  CHECK_THROWS_AS(solver::scenario_from_config(
                      solver::parse_config_text("[numerics]\nx0_seed = warm\n")),
                  ConfigError);
}

TEST_CASE("delay registry") {
  const DelayFunction lag = DelayFunction::constant_lag(0.25);
  CHECK(lag(0.0) == doctest::Approx(-0.25));
  CHECK(lag(1.0) == doctest::Approx(0.75));
  const DelayFunction prop = DelayFunction::proportional(0.5);
  CHECK(prop(0.8) == doctest::Approx(0.4));
  CHECK(DelayFunction::identity()(0.3) == 0.3);
  CHECK_THROWS(DelayFunction::proportional(0.0));
  CHECK_THROWS(DelayFunction::proportional(1.5));
  CHECK_THROWS(DelayFunction::constant_lag(-1.0));
}

TEST_CASE("coefficient fixtures respect their registered moduli") {
  const auto coeffs =
      solver::Coefficients::make("sqrt_log", 0.5, 0.1, "linear", 0.3, "const", 0.1, 0.75);
  CHECK(coeffs.m_g() == 0.3);
  CHECK(coeffs.l() == doctest::Approx(0.09));

  // the drift lands on the first basis vector with the halved sqrt-log scalar
  const int n = 4;
  std::vector<double> x = {0.04, -1.0, 2.0, 0.5}, fx(n);
  coeffs.f(0.2, x.data(), fx.data(), n);
  CHECK(fx[1] == 0.0);
  CHECK(fx[2] == 0.0);
  const double lambda2 = 0.04 * 0.04 * std::log(1.0 / (0.04 * 0.04));
  CHECK(fx[0] == doctest::Approx(0.5 * 0.5 * std::sqrt(lambda2)).epsilon(1e-12));

  // difference bound against the registered G on a deterministic sweep
  std::vector<double> y(n), fy(n);
  for (double eps : {1e-8, 1e-5, 1e-2, 0.5, 3.0}) {
    y = x;
    y[0] += eps;
    coeffs.f(0.2, y.data(), fy.data(), n);
    double diff_sq = 0.0, dist_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      diff_sq += (fx[i] - fy[i]) * (fx[i] - fy[i]);
      dist_sq += (x[i] - y[i]) * (x[i] - y[i]);
    }
    CHECK(diff_sq <= coeffs.modulus_g(0.2, dist_sq) + 1e-15);
  }
}

TEST_CASE("phi registry") {
  solver::PhiSpec phi;
  phi.kind = "decay_ramp";
  phi.amp = 0.5;
  phi.decay = 1.0;
  phi.ramp = 0.2;
  CHECK(phi.value(0.0, 0) == doctest::Approx(0.5));
  CHECK(phi.value(0.0, 1) == doctest::Approx(0.25));
  CHECK(phi.value(-1.0, 0) == doctest::Approx(0.5 * 0.8));
  solver::PhiSpec zero;
  zero.kind = "zero";
  CHECK(zero.value(-0.3, 2) == 0.0);
}

TEST_CASE("scenario structural validation") {
  auto kv = solver::parse_config_text("[q]\nkind = explicit\nlambda = 1,0.5\n");
  // two Q modes against eight generator modes
  CHECK_THROWS_AS(solver::scenario_from_config(kv), ConfigError);
}
