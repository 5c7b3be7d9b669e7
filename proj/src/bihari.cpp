#include "nsfde/bihari.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nsfde/errors.hpp"
#include "nsfde/quadrature.hpp"

namespace nsfde::bihari {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFloor = 1e-15;     // evaluation floor for G near 0
constexpr double kBlowupCap = 1e280;  // bracket cap before the +inf sentinel
}  // namespace

ConcaveModulus ConcaveModulus::zero() {
  return ConcaveModulus(Kind::zero, 0.0, 0.0, 0.0, false, "zero");
}

ConcaveModulus ConcaveModulus::linear(double l, double scale) {
  if (!(l >= 0.0) || !(scale >= 0.0))
    throw std::invalid_argument("ConcaveModulus::linear: nonnegative parameters required");
  std::ostringstream name;
  name << "linear(L=" << l << ",scale=" << scale << ")";
  return ConcaveModulus(Kind::linear, l, 0.0, scale, l * scale > 0.0, name.str());
}

ConcaveModulus ConcaveModulus::log_splice(double delta, double scale) {
  if (!(delta > 0.0) || !(delta < 1.0 / M_E))
    throw std::invalid_argument("ConcaveModulus::log_splice: delta must lie in (0, 1/e)");
  if (!(scale > 0.0))
    throw std::invalid_argument("ConcaveModulus::log_splice: scale must be positive");
  std::ostringstream name;
  name << "log_splice(delta=" << delta << ",scale=" << scale << ")";
  return ConcaveModulus(Kind::log_splice, 0.0, delta, scale, true, name.str());
}

ConcaveModulus ConcaveModulus::power(double p, double scale) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("ConcaveModulus::power: p must lie in (0, 1)");
  if (!(scale > 0.0))
    throw std::invalid_argument("ConcaveModulus::power: scale must be positive");
  std::ostringstream name;
  name << "power(p=" << p << ",scale=" << scale << ")";
  return ConcaveModulus(Kind::power, p, 0.0, scale, false, name.str());
}

double ConcaveModulus::operator()(double u) const {
  if (!(u >= 0.0)) throw std::domain_error("ConcaveModulus: argument must be >= 0");
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::linear:
      return scale_ * a_ * u;
    case Kind::log_splice: {
      if (u == 0.0) return 0.0;
      if (u <= delta_) return scale_ * u * std::log(1.0 / u);
      const double slope = std::log(1.0 / delta_) - 1.0;  // lambda_2'(delta-)
      return scale_ * (delta_ * std::log(1.0 / delta_) + slope * (u - delta_));
    }
    case Kind::power:
      return scale_ * std::pow(u, a_);
  }
  return 0.0;
}

namespace detail {

double modulus_integral_g(const ConcaveModulus& rho, double x0, double x) {
  if (x == x0) return 0.0;
  auto f = [&rho](double y) { return 1.0 / rho(y); };
  const double sign = x > x0 ? 1.0 : -1.0;
  const double lo = std::min(x0, x);
  const double hi = std::max(x0, x);
  return sign * quad::adaptive_simpson(f, lo, hi, 1e-13);
}

double modulus_integral_g_inverse(const ConcaveModulus& rho, double x0, double target,
                                  double bracket_lo) {
  // G is strictly increasing where rho > 0; expand the bracket upward, then
  // bisect with incremental quadrature so each step integrates a short
  // interval only.
  double lo = std::max(bracket_lo, kFloor);
  double g_lo = modulus_integral_g(rho, x0, lo);
  if (g_lo > target) return lo;  // target below the bracket: clamp
  double hi = std::max({x0, lo, 1.0});
  double g_hi = g_lo + quad::adaptive_simpson([&rho](double y) { return 1.0 / rho(y); }, lo, hi, 1e-13);
  while (g_hi < target) {
    if (hi > kBlowupCap) return kInf;
    const double next = hi * 4.0;
    g_hi += quad::adaptive_simpson([&rho](double y) { return 1.0 / rho(y); }, hi, next, 1e-13);
    hi = next;
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid =
        g_lo + quad::adaptive_simpson([&rho](double y) { return 1.0 / rho(y); }, lo, mid, 1e-14);
    if (g_mid < target) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

namespace {

void check_curves(std::span<const double> h, std::span<const double> lam, const TimeGrid& grid,
                  const char* who) {
  if (static_cast<int>(h.size()) != grid.n_nodes() ||
      static_cast<int>(lam.size()) != grid.n_nodes())
    throw std::invalid_argument(std::string(who) + ": curves must have one value per grid node");
  for (double v : h)
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(who) + ": h must be nonnegative");
  for (double v : lam)
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(who) + ": lambda must be nonnegative");
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, const TimeGrid& grid) {
  std::vector<double> out(grid.n_nodes(), 0.0);
  for (int k = 1; k < grid.n_nodes(); ++k)
    out[k] = out[k - 1] + 0.5 * grid.dt() * (f[k - 1] + f[k]);
  return out;
}

}  // namespace

std::vector<double> gronwall_bound(std::span<const double> h, std::span<const double> lam,
                                   const TimeGrid& grid) {
  check_curves(h, lam, grid, "gronwall_bound");
  const std::vector<double> cum = cumulative_trapezoid(lam, grid);
  std::vector<double> out(grid.n_nodes());
  double h_star = 0.0;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    h_star = std::max(h_star, h[k]);
    out[k] = h_star * std::exp(cum[k]);
  }
  return out;
}

std::vector<double> bihari_bound(std::span<const double> h, std::span<const double> lam,
                                 const ConcaveModulus& rho, double x0, const TimeGrid& grid) {
  check_curves(h, lam, grid, "bihari_bound");
  if (!(x0 > 0.0)) throw std::domain_error("bihari_bound: x0 must be positive");
  if (rho.is_zero() || rho(std::max(x0, kFloor)) == 0.0)
    throw std::domain_error("bihari_bound: rho vanishes on the integration range");

  const std::vector<double> cum = cumulative_trapezoid(lam, grid);
  std::vector<double> out(grid.n_nodes());

  double h_star = 0.0;
  double g_of_h_star = 0.0;
  double last_eval = 0.0;  // point at which g_of_h_star was computed
  bool have_g = false;
  for (int k = 0; k < grid.n_nodes(); ++k) {
    h_star = std::max(h_star, h[k]);
    if (h_star <= 0.0) {
      // G(0+) = -infinity for divergent moduli, so the bound collapses to 0;
      // otherwise fall through with the evaluation floor.
      if (rho.divergent_at_zero() || cum[k] == 0.0) {
        out[k] = 0.0;
        continue;
      }
    }
    const double x = std::max(h_star, kFloor);
    if (!have_g) {
      g_of_h_star = detail::modulus_integral_g(rho, x0, x);
      have_g = true;
    } else if (x > last_eval) {
      g_of_h_star +=
          quad::adaptive_simpson([&rho](double y) { return 1.0 / rho(y); }, last_eval, x, 1e-13);
    }
    last_eval = x;
    const double target = g_of_h_star + cum[k];
    out[k] = detail::modulus_integral_g_inverse(rho, x0, target, x);
  }
  return out;
}

std::vector<CheckRow> modulus_check(const ConcaveModulus& rho) {
  std::vector<CheckRow> rows;

  // Scale reference for tolerances.
  double scale_ref = 0.0;
  std::vector<double> lattice;
  for (int i = 0; i <= 240; ++i) lattice.push_back(std::pow(10.0, -10.0 + 13.0 * i / 240.0));
  for (double u : lattice) scale_ref = std::max(scale_ref, std::abs(rho(u)));
  if (scale_ref == 0.0) scale_ref = 1.0;

  if (rho.splice_delta() > 0.0) {
    const double delta = rho.splice_delta();
    const double left = rho(delta * (1.0 - 1e-9));   // log branch
    const double right = rho(delta * (1.0 + 1e-9));  // tangent branch
    CheckRow row{"splice_continuity", std::abs(left - right), 1e-7 * scale_ref, 0.0, false,
                 "branch values across u = delta"};
    row.pass = row.lhs <= row.rhs;
    rows.push_back(row);
  }

  {
    double worst = kInf;
    double prev = rho(0.0);
    for (double u : lattice) {
      const double cur = rho(u);
      worst = std::min(worst, cur - prev);
      prev = cur;
    }
    CheckRow row{"nondecreasing", worst, -1e-12 * scale_ref, 0.0, false,
                 "min consecutive increment on log lattice"};
    row.pass = row.lhs >= row.rhs;
    rows.push_back(row);
  }

  {
    double worst = kInf;
    for (std::size_t i = 0; i + 1 < lattice.size(); ++i) {
      const double a = lattice[i], b = lattice[i + 1];
      worst = std::min(worst, rho(0.5 * (a + b)) - 0.5 * (rho(a) + rho(b)));
    }
    CheckRow row{"midpoint_concavity", worst, -1e-12 * scale_ref, 0.0, false,
                 "min midpoint-concavity margin"};
    row.pass = row.lhs >= row.rhs;
    rows.push_back(row);
  }

  {
    CheckRow row{"integral_divergence", 0.0, 1.4, 0.0, false,
                 "growth ratio of \\int_eps^1 dy/rho over eps = 1e-2..1e-10"};
    if (rho.is_zero() || rho(1.0) == 0.0) {
      row.note = "rho vanishes; divergence check not applicable";
      row.pass = false;
    } else {
      auto inv = [&rho](double y) { return 1.0 / rho(y); };
      double first = 0.0, last = 0.0;
      bool monotone = true;
      double prev = 0.0;
      for (int d = 1; d <= 5; ++d) {
        const double eps = std::pow(10.0, -2.0 * d);
        const double val = quad::adaptive_simpson(inv, eps, 1.0, 1e-10);
        if (d == 1) first = val;
        if (d > 1 && val <= prev) monotone = false;
        prev = val;
        last = val;
      }
      row.lhs = first > 0.0 ? last / first : kInf;
      row.pass = monotone && row.lhs >= row.rhs && rho.divergent_at_zero();
      std::ostringstream note;
      note << (monotone ? "monotone growth" : "growth not monotone") << "; registry expects "
           << (rho.divergent_at_zero() ? "divergent" : "convergent");
      row.note = note.str();
    }
    rows.push_back(row);
  }

  return rows;
}

}  // namespace nsfde::bihari
