#include "nsfde/fbm.hpp"

#include <cmath>
#include <stdexcept>

#include "nsfde/errors.hpp"
#include "nsfde/quadrature.hpp"
#include "nsfde/rng.hpp"

namespace nsfde::fbm {

Hurst::Hurst(double h) : h_(h) {
  if (!(h > 0.5) || !(h < 1.0))
    throw std::domain_error("Hurst: H must lie in (1/2, 1)");
}

double covariance_rh(double s, double t, Hurst h) {
  if (s < 0.0 || t < 0.0) throw std::domain_error("covariance_rh: negative time");
  const double two_h = h.two_h();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

namespace detail {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double singular_kernel_integral(double s, double a, double b, Hurst h, int quad_points) {
  if (quad_points < 8)
    throw std::invalid_argument("singular_kernel_integral: quad_points >= 8 required");
  if (!(b > a)) return 0.0;
  const double alpha = h.value() - 0.5;
  // v = (r - s)^alpha turns (r-s)^{H-3/2} dr into dv / alpha.
  const double lo = std::pow(a - s, alpha);
  const double hi = std::pow(b - s, alpha);
  auto transformed = [&](double v) { return std::pow(s + std::pow(v, 1.0 / alpha), alpha); };
  const double coarse = quad::integrate_gl(transformed, lo, hi, quad_points);
  const double fine = quad::integrate_gl(transformed, lo, hi, 2 * quad_points);
  const double scale = std::abs(fine) + 1e-300;
  if (std::abs(fine - coarse) > 1e-9 * scale + 1e-14)
    throw NumericError("singular_kernel_integral: quadrature refinement did not converge");
  return fine / alpha;
}

double cholesky_factor_with_jitter(std::vector<double>& a, int n) {
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, a[static_cast<std::size_t>(i) * n + i]);

  const std::vector<double> original = a;
  const double jitters[] = {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10};
  for (double rel : jitters) {
    a = original;
    const double jitter = rel * max_diag;
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + i] += jitter;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = a[static_cast<std::size_t>(i) * n + j];
        for (int k = 0; k < j; ++k)
          sum -= a[static_cast<std::size_t>(i) * n + k] * a[static_cast<std::size_t>(j) * n + k];
        if (i == j) {
          if (!(sum > 0.0)) {
            ok = false;
            break;
          }
          a[static_cast<std::size_t>(i) * n + i] = std::sqrt(sum);
        } else {
          a[static_cast<std::size_t>(i) * n + j] = sum / a[static_cast<std::size_t>(j) * n + j];
        }
      }
    }
    if (ok) {
      // Zero the strict upper triangle so the factor can be used directly.
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = 0.0;
      return jitter;
    }
  }
  throw NumericError(
      "cholesky_factor_with_jitter: matrix not positive definite after 1e-10 relative jitter");
}

std::vector<double> volterra_kernel_matrix(const TimeGrid& grid, Hurst h, int quad_points) {
  const int m = grid.n_steps();
  const double dt = grid.dt();
  std::vector<double> k(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 1; i <= m; ++i) {
    const double t = grid.node(i);
    for (int j = 0; j < i; ++j) {
      const double s_mid = (j + 0.5) * dt;
      k[static_cast<std::size_t>(i - 1) * m + j] = kernel_kh(t, s_mid, h, quad_points);
    }
  }
  return k;
}

std::vector<double> volterra_discrete_cov(const TimeGrid& grid, Hurst h, int quad_points) {
  const int m = grid.n_steps();
  const double dt = grid.dt();
  const std::vector<double> k = volterra_kernel_matrix(grid, h, quad_points);
  std::vector<double> cov(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 1; i <= m; ++i) {
    for (int l = i; l <= m; ++l) {
      double sum = 0.0;
      for (int j = 0; j < i; ++j)
        sum += k[static_cast<std::size_t>(i - 1) * m + j] * k[static_cast<std::size_t>(l - 1) * m + j];
      cov[static_cast<std::size_t>(i - 1) * m + (l - 1)] = sum * dt;
      cov[static_cast<std::size_t>(l - 1) * m + (i - 1)] = sum * dt;
    }
  }
  return cov;
}

}  // namespace detail

double c_h(Hurst h) {
  const double hv = h.value();
  const double num = hv * (2.0 * hv - 1.0);
  return std::sqrt(num / std::exp(detail::log_beta(2.0 - 2.0 * hv, hv - 0.5)));
}

double kernel_kh(double t, double s, Hurst h, int quad_points) {
  if (s < 0.0 || t < 0.0) throw std::domain_error("kernel_kh: negative time");
  if (t <= s) return 0.0;
  if (s == 0.0) throw std::domain_error("kernel_kh: s = 0 with t > s (weight s^{1/2-H} undefined)");
  const double weight = std::pow(s, 0.5 - h.value());
  return c_h(h) * weight * detail::singular_kernel_integral(s, s, t, h, quad_points);
}

CovMatrix CovMatrix::build(const TimeGrid& grid, Hurst h) {
  const int n = grid.n_steps();
  if (n < 1) throw std::invalid_argument("CovMatrix::build: grid needs an interior node");
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = covariance_rh(grid.node(i + 1), grid.node(j + 1), h);
      a[static_cast<std::size_t>(i) * n + j] = v;
      a[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return CovMatrix(grid, h, n, std::move(a));
}

FbmSampler::FbmSampler(const TimeGrid& grid, Hurst h) : FbmSampler(CovMatrix::build(grid, h)) {}

FbmSampler::FbmSampler(const CovMatrix& cov) : cov_(cov), chol_(cov.data()) {
  jitter_used_ = detail::cholesky_factor_with_jitter(chol_, cov_.size());
}

void FbmSampler::sample_into(std::uint64_t seed, std::uint64_t stream, double* values) const {
  const int n = cov_.size();
  rng::Stream rs(seed, stream);
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = rs.normal();
  values[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j <= i; ++j) sum += chol_[static_cast<std::size_t>(i) * n + j] * z[j];
    values[i + 1] = sum;
  }
}

std::vector<ScalarFbmPath> sample_cholesky(const CovMatrix& cov, int n_paths, std::uint64_t seed) {
  if (n_paths < 0) throw std::invalid_argument("sample_cholesky: n_paths must be >= 0");
  FbmSampler sampler(cov);
  std::vector<ScalarFbmPath> out;
  out.reserve(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p) {
    ScalarFbmPath path{cov.grid(), std::vector<double>(cov.grid().n_nodes())};
    sampler.sample_into(seed, rng::substream(static_cast<std::uint64_t>(p)), path.values.data());
    out.push_back(std::move(path));
  }
  return out;
}

std::vector<ScalarFbmPath> sample_volterra(const TimeGrid& grid, Hurst h, int n_paths,
                                           std::uint64_t seed, int quad_points) {
  if (n_paths < 0) throw std::invalid_argument("sample_volterra: n_paths must be >= 0");
  const int m = grid.n_steps();
  const double sqrt_dt = std::sqrt(grid.dt());
  const std::vector<double> k = detail::volterra_kernel_matrix(grid, h, quad_points);

  std::vector<ScalarFbmPath> out;
  out.reserve(static_cast<std::size_t>(n_paths));
  std::vector<double> dz(m);
  for (int p = 0; p < n_paths; ++p) {
    rng::Stream rs(seed, rng::substream(static_cast<std::uint64_t>(p)));
    for (int j = 0; j < m; ++j) dz[j] = sqrt_dt * rs.normal();
    ScalarFbmPath path{grid, std::vector<double>(grid.n_nodes(), 0.0)};
    for (int i = 1; i <= m; ++i) {
      double sum = 0.0;
      for (int j = 0; j < i; ++j) sum += k[static_cast<std::size_t>(i - 1) * m + j] * dz[j];
      path.values[i] = sum;
    }
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace nsfde::fbm
