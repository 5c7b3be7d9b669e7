#pragma once

#include <cstdint>
#include <vector>

#include "nsfde/fbm.hpp"
#include "nsfde/grid.hpp"

namespace nsfde::hilbert {

/// Truncated orthonormal basis {e_1..e_N}.
struct Basis {
  int n_modes;
};

/// Diagonal trace-class covariance operator Q e_n = lambda_n e_n, truncated
/// at N modes, with an analytic bound on the dropped tail of the trace.
class TraceClassQ {
 public:
  TraceClassQ(std::vector<double> eigenvalues, double tail_bound = 0.0);

  /// lambda_n = amp * n^{-p}; requires p > 1 so the full trace is finite.
  /// Tail bound: amp * N^{1-p} / (p - 1).
  static TraceClassQ power_law(int n_modes, double amp, double p);

  int n_modes() const { return static_cast<int>(eigenvalues_.size()); }
  double eigenvalue(int n) const { return eigenvalues_[n]; }  // 0-based
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  double tail_bound() const { return tail_bound_; }

 private:
  std::vector<double> eigenvalues_;
  double tail_bound_;
};

double trace_q(const TraceClassQ& q);

/// Coefficients of a linear map psi: Y -> X in the shared truncated basis,
/// row-major: (psi e_j)_i = m[i * n + j].
struct HSOperator {
  int n = 0;
  std::vector<double> m;

  static HSOperator zero(int n) { return HSOperator{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)}; }
  static HSOperator identity(int n);
  static HSOperator scaled_identity(int n, double c);

  double at(int i, int j) const { return m[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return m[static_cast<std::size_t>(i) * n + j]; }

  /// out = psi * v; out may not alias v.
  void apply(const double* v, double* out) const;
};

/// ||psi||_{L_2^0} = sqrt(sum_n lambda_n ||psi e_n||^2).
double hs_norm(const HSOperator& psi, const TraceClassQ& q);

/// Batch of Q-fBm trajectories; coefficient of mode n at node k of path p is
/// coeff(p, k, n). All coefficients at node 0 are zero.
class QFbmPaths {
 public:
  QFbmPaths(TimeGrid grid, int n_paths, int n_modes)
      : grid_(grid),
        n_paths_(n_paths),
        n_modes_(n_modes),
        coeffs_(static_cast<std::size_t>(n_paths) * grid.n_nodes() * n_modes, 0.0) {}

  const TimeGrid& grid() const { return grid_; }
  int n_paths() const { return n_paths_; }
  int n_modes() const { return n_modes_; }

  double coeff(int path, int node, int mode) const { return coeffs_[index(path, node, mode)]; }
  double& coeff(int path, int node, int mode) { return coeffs_[index(path, node, mode)]; }

  const double* node_coeffs(int path, int node) const {
    return coeffs_.data() + index(path, node, 0);
  }

 private:
  std::size_t index(int path, int node, int mode) const {
    return (static_cast<std::size_t>(path) * grid_.n_nodes() + node) * n_modes_ + mode;
  }

  TimeGrid grid_;
  int n_paths_;
  int n_modes_;
  std::vector<double> coeffs_;
};

/// B^H_Q(t) = sum_n sqrt(lambda_n) e_n beta_n^H(t) with independent scalar
/// fBms, one counter-based stream per (seed, path, mode). With N = 1 and
/// lambda_1 = 1 this reproduces sample_cholesky path for path bitwise.
QFbmPaths sample_qfbm(const TimeGrid& grid, fbm::Hurst h, const TraceClassQ& q, int n_paths,
                      std::uint64_t seed);

}  // namespace nsfde::hilbert
