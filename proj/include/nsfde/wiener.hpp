#pragma once

#include <cstdint>
#include <vector>

#include "nsfde/fbm.hpp"
#include "nsfde/grid.hpp"
#include "nsfde/hilbert.hpp"

namespace nsfde::wiener {

/// Piecewise-constant real function on [0, T]: value values[k] on
/// [breaks[k], breaks[k+1]). Square-integrable by construction.
class StepFunction {
 public:
  StepFunction(std::vector<double> breaks, std::vector<double> values);

  /// Constant value per cell of a uniform grid.
  static StepFunction on_grid(const TimeGrid& grid, std::vector<double> values);

  /// 1_{[0, t]} on [0, t_end].
  static StepFunction indicator(double t, double t_end);

  double t_end() const { return breaks_.back(); }
  int n_cells() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double t) const;
  double l2_norm_sq() const;  // \int_0^T psi(s)^2 ds

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

/// (K_H^* phi)(s) = \int_s^T phi(r) dK/dr (r, s) dr with
/// dK/dr(r,s) = c_H s^{1/2-H} (r-s)^{H-3/2} r^{H-1/2}.
/// s = 0 is a domain error; s >= T returns 0.
double khstar_apply(const StepFunction& phi, double s, fbm::Hurst h, int quad_points = 64);

/// <psi, phi>_H = H(2H-1) \int\int psi(s) phi(t) |t-s|^{2H-2} ds dt, with the
/// weakly singular weight integrated in closed form on each cell pair.
double scalar_product_h(const StepFunction& psi, const StepFunction& phi, fbm::Hurst h);

/// ||psi||^2_{|H|}: same double integral with |psi| in both slots.
double norm_abs_h_sq(const StepFunction& psi, fbm::Hurst h);

/// Operator-valued piecewise-constant integrand on a uniform grid: ops[j]
/// acts on cell [t_j, t_{j+1}).
struct OperatorStepFunction {
  TimeGrid grid;
  std::vector<hilbert::HSOperator> ops;

  OperatorStepFunction(TimeGrid g, std::vector<hilbert::HSOperator> o);

  /// \int_0^t ||psi(s)||^2_{L_2^0} ds for a grid node t (index k).
  double l2_hs_norm_sq_upto(int k, const hilbert::TraceClassQ& q) const;
};

/// Forward Riemann-Stieltjes discretization of \int_0^t psi dB^H, one
/// X-coefficient vector per path. t must be a grid node (index k) or the
/// call is a contract violation.
std::vector<std::vector<double>> integrate_wiener(const OperatorStepFunction& psi,
                                                  const hilbert::QFbmPaths& qfbm, int k);

struct Lemma2Certificate {
  double lhs;        // Monte Carlo estimate of E ||int_0^t psi dB^H||^2
  double rhs;        // 2 H t^{2H-1} \int_0^t ||psi||^2 ds
  double mc_margin;  // 3 * relative standard error of lhs
  bool pass;         // lhs <= rhs * (1 + mc_margin)
};

Lemma2Certificate lemma2_certify(const OperatorStepFunction& psi, fbm::Hurst h,
                                 const hilbert::TraceClassQ& q, int k, int n_paths,
                                 std::uint64_t seed);

/// Scalar Wiener integral \int_0^T phi d beta^H by the K_H^* route of the
/// integral representation: sum_j (K_H^* phi)(s_j*) dbeta_j against a plain
/// Brownian motion. Second moments of this route and of the forward
/// Riemann-Stieltjes route must agree within tolerance.
std::vector<double> integrate_wiener_scalar_khstar(const StepFunction& phi, fbm::Hurst h,
                                                   const TimeGrid& grid, int n_paths,
                                                   std::uint64_t seed, int quad_points = 64);

}  // namespace nsfde::wiener
