#include "nsfde/hilbert.hpp"

#include <cmath>
#include <stdexcept>

#include "nsfde/rng.hpp"

namespace nsfde::hilbert {

TraceClassQ::TraceClassQ(std::vector<double> eigenvalues, double tail_bound)
    : eigenvalues_(std::move(eigenvalues)), tail_bound_(tail_bound) {
  if (eigenvalues_.empty()) throw std::invalid_argument("TraceClassQ: need at least one mode");
  for (double l : eigenvalues_)
    if (!(l >= 0.0)) throw std::invalid_argument("TraceClassQ: eigenvalues must be >= 0");
  if (!(tail_bound_ >= 0.0)) throw std::invalid_argument("TraceClassQ: tail_bound must be >= 0");
}

TraceClassQ TraceClassQ::power_law(int n_modes, double amp, double p) {
  if (n_modes < 1) throw std::invalid_argument("TraceClassQ::power_law: n_modes >= 1");
  if (!(amp >= 0.0)) throw std::invalid_argument("TraceClassQ::power_law: amp >= 0");
  if (!(p > 1.0))
    throw std::invalid_argument("TraceClassQ::power_law: p > 1 required for a finite trace");
  std::vector<double> lam(n_modes);
  for (int n = 1; n <= n_modes; ++n) lam[n - 1] = amp * std::pow(static_cast<double>(n), -p);
  const double tail = amp * std::pow(static_cast<double>(n_modes), 1.0 - p) / (p - 1.0);
  return TraceClassQ(std::move(lam), tail);
}

double trace_q(const TraceClassQ& q) {
  double s = 0.0;
  for (double l : q.eigenvalues()) s += l;
  return s;
}

HSOperator HSOperator::identity(int n) { return scaled_identity(n, 1.0); }

HSOperator HSOperator::scaled_identity(int n, double c) {
  HSOperator psi = zero(n);
  for (int i = 0; i < n; ++i) psi.at(i, i) = c;
  return psi;
}

void HSOperator::apply(const double* v, double* out) const {
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    const double* row = m.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) sum += row[j] * v[j];
    out[i] = sum;
  }
}

double hs_norm(const HSOperator& psi, const TraceClassQ& q) {
  if (psi.n != q.n_modes()) throw std::invalid_argument("hs_norm: dimension mismatch");
  double total = 0.0;
  for (int j = 0; j < psi.n; ++j) {
    double col = 0.0;
    for (int i = 0; i < psi.n; ++i) {
      const double v = psi.at(i, j);
      col += v * v;
    }
    total += q.eigenvalue(j) * col;
  }
  return std::sqrt(total);
}

QFbmPaths sample_qfbm(const TimeGrid& grid, fbm::Hurst h, const TraceClassQ& q, int n_paths,
                      std::uint64_t seed) {
  if (n_paths < 0) throw std::invalid_argument("sample_qfbm: n_paths must be >= 0");
  fbm::FbmSampler sampler(grid, h);
  QFbmPaths out(grid, n_paths, q.n_modes());
  std::vector<double> scratch(grid.n_nodes());
  for (int p = 0; p < n_paths; ++p) {
    for (int n = 0; n < q.n_modes(); ++n) {
      const double scale = std::sqrt(q.eigenvalue(n));
      sampler.sample_into(seed,
                          rng::substream(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(n)),
                          scratch.data());
      for (int k = 0; k < grid.n_nodes(); ++k) out.coeff(p, k, n) = scale * scratch[k];
    }
  }
  return out;
}

}  // namespace nsfde::hilbert
