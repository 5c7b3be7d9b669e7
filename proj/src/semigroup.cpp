#include "nsfde/semigroup.hpp"

#include <cmath>
#include <stdexcept>

#include "nsfde/errors.hpp"

namespace nsfde::semigroup {

SpectralGenerator::SpectralGenerator(std::vector<double> mu) : mu_(std::move(mu)) {
  if (mu_.empty()) throw std::invalid_argument("SpectralGenerator: need at least one mode");
  if (!(mu_[0] > 0.0))
    throw std::invalid_argument("SpectralGenerator: mu_1 > 0 required (0 in the resolvent set)");
  for (std::size_t i = 1; i < mu_.size(); ++i)
    if (mu_[i] < mu_[i - 1])
      throw std::invalid_argument("SpectralGenerator: eigenvalues must be non-decreasing");
}

SpectralGenerator SpectralGenerator::laplacian_dirichlet(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("laplacian_dirichlet: n_modes >= 1");
  std::vector<double> mu(n_modes);
  for (int n = 1; n <= n_modes; ++n) mu[n - 1] = static_cast<double>(n) * n;
  return SpectralGenerator(std::move(mu));
}

FracPower::FracPower(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw std::domain_error("FracPower: alpha must lie in (0, 1]");
}

std::vector<double> apply_semigroup(const SpectralGenerator& gen, double t,
                                    std::vector<double> v) {
  if (t < 0.0) throw std::domain_error("apply_semigroup: t must be >= 0");
  if (static_cast<int>(v.size()) != gen.n_modes())
    throw std::invalid_argument("apply_semigroup: dimension mismatch");
  for (int n = 0; n < gen.n_modes(); ++n) v[n] *= std::exp(-gen.mu(n) * t);
  return v;
}

std::vector<double> apply_frac_power(const SpectralGenerator& gen, FracPower p, PowerSign sign,
                                     std::vector<double> v) {
  if (static_cast<int>(v.size()) != gen.n_modes())
    throw std::invalid_argument("apply_frac_power: dimension mismatch");
  const double a = sign == PowerSign::plus ? p.alpha() : -p.alpha();
  for (int n = 0; n < gen.n_modes(); ++n) v[n] *= std::pow(gen.mu(n), a);
  return v;
}

double neg_frac_power_norm(const SpectralGenerator& gen, double beta) {
  return std::pow(gen.mu(0), -beta);
}

double sharp_c(double alpha) { return std::pow(alpha / M_E, alpha); }

FracPowerBound frac_power_semigroup_bound(const SpectralGenerator& gen, double beta, double t) {
  if (!(beta > 0.5) || !(beta < 1.0))
    throw std::domain_error("frac_power_semigroup_bound: beta must lie in (1/2, 1)");
  if (!(t > 0.0)) throw std::domain_error("frac_power_semigroup_bound: t = 0 (bound diverges)");
  const double a = 1.0 - beta;
  double norm = 0.0;
  for (int n = 0; n < gen.n_modes(); ++n)
    norm = std::max(norm, std::pow(gen.mu(n), a) * std::exp(-gen.mu(n) * t));
  const double bound = sharp_c(a) / std::pow(t, a);
  if (!(norm <= bound))
    throw NumericError("frac_power_semigroup_bound: spectral norm exceeded the C_{1-beta} bound");
  return {norm, bound};
}

}  // namespace nsfde::semigroup
