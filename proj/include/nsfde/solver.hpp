#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsfde/bihari.hpp"
#include "nsfde/errors.hpp"
#include "nsfde/grid.hpp"
#include "nsfde/scenario.hpp"

namespace nsfde::solver {

/// Initial datum sampled on its own uniform grid over [-r, 0]; shared by
/// every Picard iterate (so "x = phi on [-r, 0]" holds bitwise).
struct PhiGrid {
  double r = 0.0;
  int n_steps = 0;  // 0 when r = 0: only the node at t = 0
  int n_modes = 0;
  std::vector<double> vals;  // [node][mode], node 0 at t = -r, node n_steps at 0

  double node(int i) const { return n_steps == 0 ? 0.0 : -r + r * i / n_steps; }
  const double* at(int i) const { return vals.data() + static_cast<std::size_t>(i) * n_modes; }

  /// Linear interpolation for t in [-r, 0].
  void value_at(double t, double* out) const;

  /// sup over the phi nodes of ||phi(t)||^2.
  double sup_norm_sq() const;
};

/// Per-path trajectories on the main grid [0, T]: value(path, node, mode).
class Field {
 public:
  Field(TimeGrid grid, int n_paths, int n_modes)
      : grid_(grid),
        n_paths_(n_paths),
        n_modes_(n_modes),
        v_(static_cast<std::size_t>(n_paths) * grid.n_nodes() * n_modes, 0.0) {}

  const TimeGrid& grid() const { return grid_; }
  int n_paths() const { return n_paths_; }
  int n_modes() const { return n_modes_; }

  double* at(int path, int node) { return v_.data() + index(path, node); }
  const double* at(int path, int node) const { return v_.data() + index(path, node); }

  const std::vector<double>& raw() const { return v_; }

 private:
  std::size_t index(int path, int node) const {
    return (static_cast<std::size_t>(path) * grid_.n_nodes() + node) * n_modes_;
  }

  TimeGrid grid_;
  int n_paths_;
  int n_modes_;
  std::vector<double> v_;
};

struct IterateStats {
  std::vector<double> m;   // m_n(t_k) = empirical E||x(t_k)||^2, per node
  std::vector<double> se;  // jackknife SE of m at each node
  std::vector<double> d;   // running-sup Cauchy curve vs previous iterate (empty for x^0)
};

struct InnerSolveStats {
  int windows = 0;
  int total_sweeps = 0;
  double measured_rate = 0.0;  // geometric sweep-contraction rate, squared metric
  bool triangular = false;     // delay strictly lagging on the grid: one pass is exact
};

struct DiagnosticsReport {
  std::vector<bihari::CheckRow> hypothesis_rows;
  bool hypotheses_pass = false;
  std::string first_violated;

  double gamma_t1 = 0.0;  // contraction constant on the window length actually used
  double t1 = 0.0;
  int n_windows = 1;
  double measured_inner_rate = 0.0;
  bool inner_triangular = false;

  int iterations = 0;   // number of Picard steps taken (iterates.size() - 1)
  bool converged = false;
  double final_d = 0.0;

  std::vector<IterateStats> iterate_stats;
  std::vector<double> u_curve;  // Lemma-7 comparison curve on the main grid
  double d0_hat = 0.0;
  double m1_hat = 0.0;
  double m2_hat = 0.0;
  double u0 = 0.0;

  std::vector<bihari::CheckRow> certification_rows;
  bool certifications_pass = false;

  bool all_pass() const { return hypotheses_pass && converged && certifications_pass; }
};

/// Picard non-convergence with the partial diagnostics attached.
class ConvergenceFailure : public NumericError {
 public:
  ConvergenceFailure(const std::string& msg, DiagnosticsReport report)
      : NumericError(msg), report_(std::move(report)) {}
  const DiagnosticsReport& report() const { return report_; }

 private:
  DiagnosticsReport report_;
};

struct PicardRun {
  std::vector<Field> iterates;  // x^0 .. x^K
  PhiGrid phi;
  DiagnosticsReport report;
};

/// Checks (H.1)-(H.4) plus the structural requirements on phi; failures are
/// report rows, never exceptions.
DiagnosticsReport validate_hypotheses(const Scenario& s);

/// gamma(t) = 2 M_g^2 { ||(-A)^{-beta}||^2 + C_{1-beta}^2 t^{2 beta - 1} t / (2 beta - 1) }.
double contraction_gamma(const Scenario& s, double t);

/// Fourth-order integration of u' = alpha K(t, u), u(0) = u0, on the main grid.
std::vector<double> integrate_moment_ode(const Scenario& s, double u0, double alpha);

class MildSolver {
 public:
  explicit MildSolver(const Scenario& s);

  const Scenario& scenario() const { return s_; }
  const PhiGrid& phi() const { return phi_; }
  TimeGrid grid() const { return grid_; }

  /// \int_0^{t_k} T(t_k - s) sigma(s) dB^H(s) by the forward sum; shared by
  /// every Picard iterate and deterministic per scenario seed.
  Field compute_stochastic_convolution() const;

  Field seed_iterate(X0Seed kind) const;

  /// One Picard step: g-terms on the iterate under construction (resolved by
  /// the windowed inner contraction), f on prev, noise from z.
  Field next_iterate(const Field& prev, const Field& z, InnerSolveStats* stats = nullptr) const;

  /// Max-norm residual of the discrete mild-solution identity with f and g
  /// both evaluated on x (zero at a fixed point of the full map).
  double mild_residual(const Field& x, const Field& z) const;

  double window_length() const { return t1_; }
  int n_windows() const { return n_windows_; }
  bool triangular() const { return triangular_; }

  /// Hypothesis gate, x^0 seed, Picard loop, moment/Cauchy certification.
  PicardRun run() const;

 private:
  struct PathContext;

  void build_delay_table();
  void lookup(const Field& x, int path, int table_index, double* out) const;
  void inner_solve_path_window(PathContext& ctx, int first, int last) const;

  Scenario s_;
  TimeGrid grid_;
  PhiGrid phi_;
  int n_modes_;

  std::vector<double> exp_dt_;       // e^{-mu_n dt}
  std::vector<double> exp_nk_;       // [node][mode] e^{-mu_n t_k}
  std::vector<double> neg_beta_;     // mu_n^{-beta}
  std::vector<double> f_weight_;     // (1 - e^{-mu_n dt}) / mu_n
  std::vector<double> g_weight_;     // 1 - e^{-mu_n dt}
  std::vector<double> head_;         // [node][mode] T(t_k)(phi(0) + g(0, phi(rho(0))))

  // Delay lookups rho(t_k) resolved to (segment, index, weight).
  struct DelayRef {
    bool in_phi;
    int idx;
    double w;
  };
  std::vector<DelayRef> delay_;

  double t1_ = 0.0;
  int n_windows_ = 1;
  bool triangular_ = false;
};

/// Measured (D0, M2) for the Lemma-6 moment inequality, the integrated u
/// curve, and the domination rows for every iterate; appends to report.
void moment_bound_certify(const Scenario& s, const PhiGrid& phi, DiagnosticsReport& report);

/// Smallest feasible M1 for the Lemma-6 Cauchy inequality plus the
/// strict-decrease and convergence rows; appends to report.
void cauchy_certify(const Scenario& s, DiagnosticsReport& report);

/// sup_k mean_p ||a - b||^2 over the main grid (the dual-seed uniqueness
/// metric).
double sup_mean_sq_distance(const Field& a, const Field& b);

PicardRun picard_run(const Scenario& s);

}  // namespace nsfde::solver
