#pragma once

// Test-only oracles, kept independent of the library's numeric paths:
// tanh-sinh quadrature for endpoint-singular integrands, very-high-order
// composite Gauss-Legendre, and small closed forms. Nothing here calls the
// implementation routines it is used to check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

/// Tanh-sinh (double exponential) quadrature on (a, b); handles integrable
/// endpoint singularities. Level-refined until successive levels agree.
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  auto transformed = [&](double t) {
    const double u = std::tanh(0.5 * M_PI * std::sinh(t));
    const double x = mid + half * u;
    if (x <= a || x >= b) return 0.0;
    const double w = 0.5 * M_PI * std::cosh(t) / std::pow(std::cosh(0.5 * M_PI * std::sinh(t)), 2);
    return f(x) * w * half;
  };
  const double t_max = 4.0;
  double prev = 0.0;
  for (int level = 3; level <= 12; ++level) {
    const int n = 1 << level;
    const double h = t_max / n;
    double sum = transformed(0.0);
    for (int i = 1; i <= n; ++i) sum += transformed(i * h) + transformed(-i * h);
    sum *= h;
    if (level > 4 && std::abs(sum - prev) < tol * (std::abs(sum) + 1.0)) return sum;
    prev = sum;
  }
  return prev;
}

/// Composite Gauss-Legendre with fixed 16-point panels (nodes hard-coded to
/// stay independent of the library's Newton-iterated rule).
inline double composite_gl16(const std::function<double(double)>& f, double a, double b,
                             int panels) {
  static const double xs[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
  static const double ws[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                               0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                               0.0622535239386479, 0.0271524594117541};
  double total = 0.0;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double c = lo + 0.5 * width;
    const double h = 0.5 * width;
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) sum += ws[i] * (f(c + h * xs[i]) + f(c - h * xs[i]));
    total += sum * h;
  }
  return total;
}

/// Beta function via tanh-sinh on the defining integral (not via lgamma).
/// The nodes' distances to both endpoints are tracked in stable form
/// (1 -+ tanh(w) = 2 e^{-+2w}/(1 + e^{-+2w})), so the x^{a-1} and
/// (1-x)^{b-1} endpoint singularities are evaluated far below machine
/// epsilon from the endpoints.
inline double beta_integral(double a, double b) {
  auto point_value = [a, b](double t) {
    const double w = 0.5 * M_PI * std::sinh(t);
    const double q = std::exp(-2.0 * std::abs(w));
    const double dist_near = q / (1.0 + q);        // (1 - |u|)/2
    const double dist_far = 1.0 / (1.0 + q);       // (1 + |u|)/2
    const double weight = 0.5 * M_PI * std::cosh(t) * 4.0 * q / ((1.0 + q) * (1.0 + q)) * 0.5;
    const double dist0 = w >= 0.0 ? dist_far : dist_near;  // x
    const double dist1 = w >= 0.0 ? dist_near : dist_far;  // 1 - x
    return std::pow(dist0, a - 1.0) * std::pow(dist1, b - 1.0) * weight;
  };
  const double t_max = 6.5;
  double prev = 0.0;
  for (int level = 4; level <= 14; ++level) {
    const int n = 1 << level;
    const double h = t_max / n;
    double sum = point_value(0.0);
    for (int i = 1; i <= n; ++i) sum += point_value(i * h) + point_value(-i * h);
    sum *= h;
    if (level > 5 && std::abs(sum - prev) < 1e-13 * (std::abs(sum) + 1.0)) return sum;
    prev = sum;
  }
  return prev;
}

/// \int_s^t (u-s)^{H-3/2} u^{H-1/2} du after the singularity-removing
/// substitution v = (u-s)^{H-1/2}, integrated by dense composite GL panels.
inline double kernel_integral_substituted(double t, double s, double h, int panels = 256) {
  const double alpha = h - 0.5;
  const double hi = std::pow(t - s, alpha);
  return composite_gl16(
             [s, alpha](double v) { return std::pow(s + std::pow(v, 1.0 / alpha), alpha); }, 0.0,
             hi, panels) /
         alpha;
}

/// Second moment of the fBm Ornstein-Uhlenbeck value at T:
/// sigma^2 alpha_H \int\int e^{-a(T-u)} e^{-a(T-v)} |u-v|^{2H-2} du dv,
/// inner singular integral removed by w = (u-v)^{2H-1}.
inline double fbm_ou_second_moment(double a, double sigma, double t_end, double h,
                                   int panels = 96) {
  const double two_h = 2.0 * h;
  const double gamma = two_h - 1.0;  // w = (u-v)^gamma
  const double alpha_h = h * (two_h - 1.0);
  auto inner = [&](double u) {
    // \int_0^u e^{-a(T-v)} (u-v)^{2H-2} dv = (1/gamma) \int_0^{u^gamma} e^{-a(T-u+w^{1/gamma})} dw
    const double hi = std::pow(u, gamma);
    return composite_gl16(
               [&](double w) { return std::exp(-a * (t_end - u + std::pow(w, 1.0 / gamma))); },
               0.0, hi, panels) /
           gamma;
  };
  const double outer = composite_gl16(
      [&](double u) { return std::exp(-a * (t_end - u)) * inner(u); }, 0.0, t_end, panels);
  return sigma * sigma * alpha_h * 2.0 * outer;
}

/// Fixed-point iteration for the scalar integral inequality
/// w(t) = h*(t) + \int_0^t lambda(s) rho(w(s)) ds on a fine grid; the
/// maximal solution is the sharp comparison curve for the Bihari bound.
inline std::vector<double> integral_equation_fixed_point(
    const std::vector<double>& h_star, const std::vector<double>& lam, double dt,
    const std::function<double(double)>& rho, int max_iter = 500, double tol = 1e-12) {
  const std::size_t n = h_star.size();
  std::vector<double> w = h_star, next(n);
  for (int it = 0; it < max_iter; ++it) {
    double diff = 0.0;
    next[0] = h_star[0];
    double integral = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      integral += 0.5 * dt * (lam[k - 1] * rho(w[k - 1]) + lam[k] * rho(w[k]));
      next[k] = h_star[k] + integral;
      diff = std::max(diff, std::abs(next[k] - w[k]));
    }
    w = next;
    if (diff < tol) break;
  }
  return w;
}

}  // namespace oracles
