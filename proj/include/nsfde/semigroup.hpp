#pragma once

#include <vector>

namespace nsfde::semigroup {

/// Self-adjoint generator A with eigenvalues -mu_n, mu_1 <= mu_2 <= ...,
/// mu_1 > 0 (so 0 is in the resolvent set). Realizes T(t), (-A)^alpha and
/// every operator-norm constant in closed form.
class SpectralGenerator {
 public:
  explicit SpectralGenerator(std::vector<double> mu);

  /// Dirichlet Laplacian on (0, pi): mu_n = n^2.
  static SpectralGenerator laplacian_dirichlet(int n_modes);

  int n_modes() const { return static_cast<int>(mu_.size()); }
  double mu(int n) const { return mu_[n]; }  // 0-based
  const std::vector<double>& eigenvalues() const { return mu_; }

 private:
  std::vector<double> mu_;
};

/// Fractional-power exponent restricted to (0, 1].
class FracPower {
 public:
  explicit FracPower(double alpha);
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

enum class PowerSign { plus, minus };

/// T(t) v, component-wise e^{-mu_n t} v_n. Contraction: M = 1. t < 0 is a
/// domain error.
std::vector<double> apply_semigroup(const SpectralGenerator& gen, double t,
                                    std::vector<double> v);

/// (-A)^{+-alpha} v, component-wise mu_n^{+-alpha} v_n.
std::vector<double> apply_frac_power(const SpectralGenerator& gen, FracPower p, PowerSign sign,
                                     std::vector<double> v);

/// ||(-A)^{-beta}|| = mu_1^{-beta}.
double neg_frac_power_norm(const SpectralGenerator& gen, double beta);

/// Sharp envelope constant: sup_{x>0} (x t)^{a} e^{-x t} = (a/e)^a, so
/// ||(-A)^a T(t)|| <= (a/e)^a / t^a for the spectral realization.
double sharp_c(double alpha);

struct FracPowerBound {
  double norm;   // max_n mu_n^{1-beta} e^{-mu_n t}
  double bound;  // C_{1-beta} / t^{1-beta}
};

/// Computes both sides of ||(-A)^{1-beta} T(t)|| <= C_{1-beta}/t^{1-beta}
/// and asserts norm <= bound. Requires 1/2 < beta < 1 and t > 0.
FracPowerBound frac_power_semigroup_bound(const SpectralGenerator& gen, double beta, double t);

}  // namespace nsfde::semigroup
