#pragma once

#include <cstdint>
#include <vector>

#include "nsfde/grid.hpp"

namespace nsfde::fbm {

/// Hurst parameter restricted to (1/2, 1).
class Hurst {
 public:
  explicit Hurst(double h);
  double value() const { return h_; }
  double two_h() const { return 2.0 * h_; }

 private:
  double h_;
};

struct ScalarFbmPath {
  TimeGrid grid;
  std::vector<double> values;  // one per node, values[0] == 0
};

/// R_H(s, t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2. Throws std::domain_error
/// on negative times.
double covariance_rh(double s, double t, Hurst h);

/// c_H = sqrt(H(2H-1) / Beta(2-2H, H-1/2)), Beta evaluated via log-Gamma.
double c_h(Hurst h);

/// Volterra kernel K_H(t, s) = c_H s^{1/2-H} \int_s^t (u-s)^{H-3/2} u^{H-1/2} du,
/// zero whenever t <= s. The singular integral is computed on the substituted
/// variable v = (u-s)^{H-1/2} with fixed-order Gauss-Legendre plus a
/// doubled-order refinement check.
double kernel_kh(double t, double s, Hurst h, int quad_points = 64);

/// Dense symmetric covariance matrix R_H(t_i, t_j) over the interior nodes
/// t_1..t_n of a grid.
class CovMatrix {
 public:
  static CovMatrix build(const TimeGrid& grid, Hurst h);

  int size() const { return n_; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const TimeGrid& grid() const { return grid_; }
  Hurst hurst() const { return h_; }
  const std::vector<double>& data() const { return a_; }

 private:
  CovMatrix(TimeGrid grid, Hurst h, int n, std::vector<double> a)
      : grid_(grid), h_(h), n_(n), a_(std::move(a)) {}

  TimeGrid grid_;
  Hurst h_;
  int n_;
  std::vector<double> a_;  // row-major n x n
};

/// Exact-in-law sampler: Cholesky factor of the covariance matrix, one
/// counter-based normal stream per (seed, path). Path p is identical
/// regardless of batch size or parallelism.
class FbmSampler {
 public:
  FbmSampler(const TimeGrid& grid, Hurst h);
  explicit FbmSampler(const CovMatrix& cov);

  const TimeGrid& grid() const { return cov_.grid(); }
  double jitter_used() const { return jitter_used_; }

  /// Fills values[0..n_steps] for one path; values[0] = 0.
  void sample_into(std::uint64_t seed, std::uint64_t stream, double* values) const;

 private:
  CovMatrix cov_;
  std::vector<double> chol_;  // lower-triangular factor, row-major
  double jitter_used_ = 0.0;
};

std::vector<ScalarFbmPath> sample_cholesky(const CovMatrix& cov, int n_paths,
                                           std::uint64_t seed);

/// Independent cross-check generator discretizing the Volterra
/// representation with midpoint kernel evaluation per increment cell.
std::vector<ScalarFbmPath> sample_volterra(const TimeGrid& grid, Hurst h, int n_paths,
                                           std::uint64_t seed, int quad_points = 64);

namespace detail {

/// log Beta via lgamma.
double log_beta(double a, double b);

/// \int_a^b (r-s)^{H-3/2} r^{H-1/2} dr for s <= a < b (a = s allowed; the
/// endpoint singularity is removed by the v = (r-s)^{H-1/2} substitution).
double singular_kernel_integral(double s, double a, double b, Hurst h, int quad_points);

/// In-place lower Cholesky with escalating relative diagonal jitter
/// (1e-14 -> 1e-10); throws NumericError if the factorization still fails.
/// Returns the jitter actually applied (0 for clean factorizations).
double cholesky_factor_with_jitter(std::vector<double>& a, int n);

/// Midpoint-evaluated kernel matrix K[i-1][j] = K_H(t_i, (j+1/2) dt) for
/// i = 1..n_steps, j = 0..i-1 (row-major, lower-triangular layout).
std::vector<double> volterra_kernel_matrix(const TimeGrid& grid, Hurst h, int quad_points);

/// Exact covariance of the discretized Volterra generator (used to split
/// discretization bias from Monte Carlo error in tests).
std::vector<double> volterra_discrete_cov(const TimeGrid& grid, Hurst h, int quad_points);

}  // namespace detail

}  // namespace nsfde::fbm
