#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nsfde/bihari.hpp"
#include "nsfde/fbm.hpp"
#include "nsfde/grid.hpp"
#include "nsfde/hilbert.hpp"
#include "nsfde/semigroup.hpp"

namespace nsfde::solver {

/// Seed choice for the Picard iteration. eq4 is the default: x^0 solves the
/// neutral equation with zero drift and zero noise. The alternatives exist
/// for the dual-seed uniqueness comparison.
enum class X0Seed { eq4, phi_constant, zero };

/// Delay registry (H.4): continuous with -r <= rho(t) <= t on [0, T].
class DelayFunction {
 public:
  static DelayFunction constant_lag(double r);
  static DelayFunction proportional(double q);
  static DelayFunction identity();

  double operator()(double t) const;
  const std::string& name() const { return name_; }

 private:
  enum class Kind { const_lag, proportional, identity };
  DelayFunction(Kind kind, double param, std::string name)
      : kind_(kind), param_(param), name_(std::move(name)) {}

  Kind kind_;
  double param_;
  std::string name_;
};

/// Coefficient fixtures together with their code-registered moduli, so the
/// growth/difference bounds (H.1b)/(H.2b) hold by construction and stay
/// checkable.
///
/// f kinds:
///   zero
///   linear:   f(t, x) = scale * x
///   sqrt_log: f(t, x) = scale * h(x_1) e_1 with h(a) = sign(a)
///             sqrt(lambda2(a^2)) / 2; difference modulus scale^2 lambda2.
/// g kinds (g_beta = (-A)^beta g):
///   zero
///   linear:   g_beta(t, x) = kappa * x, so M_g = kappa, l = kappa^2
/// sigma kinds: zero | const (scaled identity).
class Coefficients {
 public:
  static Coefficients make(const std::string& f_kind, double f_scale, double f_delta,
                           const std::string& g_kind, double g_kappa,
                           const std::string& sigma_kind, double sigma_scale, double beta);

  void f(double t, const double* x, double* out, int n) const;
  void g_beta(double t, const double* x, double* out, int n) const;
  double sigma_scale_at(double t) const;

  double modulus_k(double t, double u) const { return k_mod_(u); }
  double modulus_g(double t, double u) const { return g_mod_(u); }
  const bihari::ConcaveModulus& k_modulus() const { return k_mod_; }
  const bihari::ConcaveModulus& g_modulus() const { return g_mod_; }

  double l() const { return l_; }
  double m_g() const { return m_g_; }
  double beta() const { return beta_; }

  bool f_is_zero() const { return f_kind_ == "zero"; }
  bool g_is_zero() const { return g_kind_ == "zero"; }
  bool sigma_is_zero() const { return sigma_kind_ == "zero" || sigma_scale_ == 0.0; }

  const std::string& f_kind() const { return f_kind_; }
  const std::string& g_kind() const { return g_kind_; }
  const std::string& sigma_kind() const { return sigma_kind_; }
  double f_scale() const { return f_scale_; }
  double f_delta() const { return f_delta_; }
  double g_kappa() const { return g_kappa_; }
  double sigma_scale() const { return sigma_scale_; }

 private:
  Coefficients(bihari::ConcaveModulus k, bihari::ConcaveModulus g)
      : k_mod_(std::move(k)), g_mod_(std::move(g)) {}

  const bihari::ConcaveModulus& unit_lambda2() const;

  std::string f_kind_, g_kind_, sigma_kind_;
  double f_scale_ = 0.0, f_delta_ = 0.1, g_kappa_ = 0.0, sigma_scale_ = 0.0;
  double l_ = 0.0, m_g_ = 0.0, beta_ = 0.75;
  bihari::ConcaveModulus k_mod_;
  bihari::ConcaveModulus g_mod_;
};

/// Initial datum registry on [-r, 0]:
///   zero
///   decay_ramp: phi_n(t) = amp * n^{-decay} * (1 + ramp * t)
struct PhiSpec {
  std::string kind = "decay_ramp";
  double amp = 0.5;
  double decay = 1.0;
  double ramp = 0.0;

  double value(double t, int mode_index) const;  // mode_index 0-based
};

/// Full problem instance.
struct Scenario {
  fbm::Hurst h;
  double t_end;
  double delay_r;
  DelayFunction rho;
  semigroup::SpectralGenerator gen;
  hilbert::TraceClassQ q;
  Coefficients coeffs;
  PhiSpec phi;

  int n_steps;
  int n_paths;
  std::uint64_t seed;
  double picard_tol;
  double inner_tol;
  int max_iters;
  int min_iters;
  X0Seed x0_seed;
  bool force;

  int out_paths;    // paths written to iterates.csv
  bool timestamp;   // emit the generated-at comment line in CSV outputs

  int n_modes() const { return gen.n_modes(); }
  TimeGrid main_grid() const { return TimeGrid(t_end, n_steps); }

  void validate() const;  // structural checks (mode counts, ranges)
};

/// Line-based `key = value` config with [section] headers and # comments.
/// Returned keys are section-qualified ("model.hurst"). Duplicate keys are
/// a ConfigError.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Builds a Scenario, consuming recognized keys; any leftover key is a
/// ConfigError naming the offender.
Scenario scenario_from_config(const std::map<std::string, std::string>& kv);
Scenario scenario_from_file(const std::string& path);

Scenario default_scenario();

/// Canonical config text for the defaults, with schema comments. Parsing it
/// back reproduces default_scenario().
std::string print_default_config();

}  // namespace nsfde::solver
