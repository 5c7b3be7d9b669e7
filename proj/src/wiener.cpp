#include "nsfde/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsfde/rng.hpp"
#include "nsfde/stats.hpp"

namespace nsfde::wiener {

StepFunction::StepFunction(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (breaks_.size() < 2 || values_.size() + 1 != breaks_.size())
    throw std::invalid_argument("StepFunction: need k+1 breakpoints for k cell values");
  if (breaks_.front() != 0.0)
    throw std::invalid_argument("StepFunction: domain must start at 0");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1]))
      throw std::invalid_argument("StepFunction: breakpoints must be strictly increasing");
}

StepFunction StepFunction::on_grid(const TimeGrid& grid, std::vector<double> values) {
  if (static_cast<int>(values.size()) != grid.n_steps())
    throw std::invalid_argument("StepFunction::on_grid: one value per grid cell required");
  return StepFunction(grid.nodes(), std::move(values));
}

StepFunction StepFunction::indicator(double t, double t_end) {
  if (!(t > 0.0) || t > t_end)
    throw std::invalid_argument("StepFunction::indicator: need 0 < t <= t_end");
  if (t == t_end) return StepFunction({0.0, t_end}, {1.0});
  return StepFunction({0.0, t, t_end}, {1.0, 0.0});
}

double StepFunction::operator()(double t) const {
  if (t < breaks_.front() || t > breaks_.back())
    throw std::domain_error("StepFunction: argument outside [0, T]");
  if (t == breaks_.back()) return values_.back();
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double StepFunction::l2_norm_sq() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    s += values_[i] * values_[i] * (breaks_[i + 1] - breaks_[i]);
  return s;
}

double khstar_apply(const StepFunction& phi, double s, fbm::Hurst h, int quad_points) {
  const double t_end = phi.t_end();
  if (s < 0.0) throw std::domain_error("khstar_apply: negative time");
  if (s == 0.0) throw std::domain_error("khstar_apply: s = 0 (weight s^{1/2-H} undefined)");
  if (s >= t_end) return 0.0;
  const double weight = fbm::c_h(h) * std::pow(s, 0.5 - h.value());
  double total = 0.0;
  const auto& breaks = phi.breaks();
  const auto& vals = phi.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double lo = std::max(breaks[i], s);
    const double hi = breaks[i + 1];
    if (!(hi > lo) || vals[i] == 0.0) continue;
    total += vals[i] * fbm::detail::singular_kernel_integral(s, lo, hi, h, quad_points);
  }
  return weight * total;
}

namespace {

// Closed-form cell-pair weight: \int_a^b \int_c^d |t-s|^{2H-2} ds dt
// expressed through the second antiderivative g2(u) = |u|^{2H}/(2H(2H-1)).
// alpha_H * g2(u) = |u|^{2H} / 2, so the scalar product accumulates
// psi_i phi_j [G2(b-c) - G2(a-c) - G2(b-d) + G2(a-d)] with G2(u)=|u|^{2H}/2.
double weighted_double_integral(const std::vector<double>& breaks_a,
                                const std::vector<double>& vals_a,
                                const std::vector<double>& breaks_b,
                                const std::vector<double>& vals_b, double two_h) {
  auto g2 = [two_h](double u) { return 0.5 * std::pow(std::abs(u), two_h); };
  double total = 0.0;
  for (std::size_t i = 0; i < vals_a.size(); ++i) {
    if (vals_a[i] == 0.0) continue;
    const double a = breaks_a[i], b = breaks_a[i + 1];
    for (std::size_t j = 0; j < vals_b.size(); ++j) {
      if (vals_b[j] == 0.0) continue;
      const double c = breaks_b[j], d = breaks_b[j + 1];
      total += vals_a[i] * vals_b[j] * (g2(b - c) - g2(a - c) - g2(b - d) + g2(a - d));
    }
  }
  return total;
}

}  // namespace

double scalar_product_h(const StepFunction& psi, const StepFunction& phi, fbm::Hurst h) {
  if (psi.t_end() != phi.t_end())
    throw std::invalid_argument("scalar_product_h: functions must share [0, T]");
  return weighted_double_integral(psi.breaks(), psi.values(), phi.breaks(), phi.values(),
                                  h.two_h());
}

double norm_abs_h_sq(const StepFunction& psi, fbm::Hurst h) {
  std::vector<double> abs_vals(psi.values());
  for (double& v : abs_vals) v = std::abs(v);
  return weighted_double_integral(psi.breaks(), abs_vals, psi.breaks(), abs_vals, h.two_h());
}

OperatorStepFunction::OperatorStepFunction(TimeGrid g, std::vector<hilbert::HSOperator> o)
    : grid(g), ops(std::move(o)) {
  if (static_cast<int>(ops.size()) != grid.n_steps())
    throw std::invalid_argument("OperatorStepFunction: one operator per grid cell required");
  for (const auto& op : ops)
    if (op.n != ops.front().n)
      throw std::invalid_argument("OperatorStepFunction: inconsistent operator dimensions");
}

double OperatorStepFunction::l2_hs_norm_sq_upto(int k, const hilbert::TraceClassQ& q) const {
  if (k < 0 || k > grid.n_steps())
    throw std::invalid_argument("OperatorStepFunction: node index out of range");
  double s = 0.0;
  for (int j = 0; j < k; ++j) {
    const double norm = hilbert::hs_norm(ops[j], q);
    s += norm * norm * grid.dt();
  }
  return s;
}

std::vector<std::vector<double>> integrate_wiener(const OperatorStepFunction& psi,
                                                  const hilbert::QFbmPaths& qfbm, int k) {
  if (!(psi.grid == qfbm.grid()))
    throw std::invalid_argument("integrate_wiener: integrand and paths on different grids");
  if (k < 0 || k > psi.grid.n_steps())
    throw std::invalid_argument("integrate_wiener: t must be a grid node");
  const int n = psi.ops.empty() ? qfbm.n_modes() : psi.ops.front().n;
  if (n != qfbm.n_modes())
    throw std::invalid_argument("integrate_wiener: mode-count mismatch");

  std::vector<std::vector<double>> out(static_cast<std::size_t>(qfbm.n_paths()),
                                       std::vector<double>(n, 0.0));
  std::vector<double> db(n), applied(n);
  for (int p = 0; p < qfbm.n_paths(); ++p) {
    auto& acc = out[static_cast<std::size_t>(p)];
    for (int j = 0; j < k; ++j) {
      const double* b0 = qfbm.node_coeffs(p, j);
      const double* b1 = qfbm.node_coeffs(p, j + 1);
      for (int i = 0; i < n; ++i) db[i] = b1[i] - b0[i];
      psi.ops[j].apply(db.data(), applied.data());
      for (int i = 0; i < n; ++i) acc[i] += applied[i];
    }
  }
  return out;
}

Lemma2Certificate lemma2_certify(const OperatorStepFunction& psi, fbm::Hurst h,
                                 const hilbert::TraceClassQ& q, int k, int n_paths,
                                 std::uint64_t seed) {
  const hilbert::QFbmPaths paths = hilbert::sample_qfbm(psi.grid, h, q, n_paths, seed);
  const auto integrals = integrate_wiener(psi, paths, k);
  std::vector<double> sq(integrals.size());
  for (std::size_t p = 0; p < integrals.size(); ++p) {
    double norm_sq = 0.0;
    for (double v : integrals[p]) norm_sq += v * v;
    sq[p] = norm_sq;
  }
  const double lhs = stats::mean(sq);
  const double se = stats::jackknife_se(sq);
  const double t = psi.grid.node(k);
  const double rhs = t == 0.0 ? 0.0
                              : 2.0 * h.value() * std::pow(t, h.two_h() - 1.0) *
                                    psi.l2_hs_norm_sq_upto(k, q);
  const double margin = lhs > 0.0 ? 3.0 * se / lhs : 0.0;
  return {lhs, rhs, margin, lhs <= rhs * (1.0 + margin)};
}

std::vector<double> integrate_wiener_scalar_khstar(const StepFunction& phi, fbm::Hurst h,
                                                   const TimeGrid& grid, int n_paths,
                                                   std::uint64_t seed, int quad_points) {
  if (grid.t_end() != phi.t_end())
    throw std::invalid_argument("integrate_wiener_scalar_khstar: grid/function domain mismatch");
  const int m = grid.n_steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> kh(m);
  for (int j = 0; j < m; ++j) kh[j] = khstar_apply(phi, (j + 0.5) * dt, h, quad_points);

  std::vector<double> out(static_cast<std::size_t>(n_paths), 0.0);
  for (int p = 0; p < n_paths; ++p) {
    rng::Stream rs(seed, rng::substream(static_cast<std::uint64_t>(p)));
    double sum = 0.0;
    for (int j = 0; j < m; ++j) sum += kh[j] * sqrt_dt * rs.normal();
    out[static_cast<std::size_t>(p)] = sum;
  }
  return out;
}

}  // namespace nsfde::wiener
