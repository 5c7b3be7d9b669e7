#pragma once

#include <span>
#include <string>
#include <vector>

#include "nsfde/grid.hpp"

namespace nsfde::bihari {

/// Certification row shared by the modulus checker, hypothesis validation
/// and the solver report: one certified inequality per row.
struct CheckRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
  std::string note;
};

/// Registry of concave nondecreasing moduli rho: R+ -> R+ used as K and G
/// in the solver hypotheses and as rho in the Bihari bound.
///   linear(L):             L u
///   log_splice(delta):     u log(1/u) on [0, delta], tangent line beyond
///                          (delta < 1/e so the slope stays nonnegative)
///   power(p):              u^p, p in (0,1)
/// Every entry accepts an overall scale factor.
class ConcaveModulus {
 public:
  static ConcaveModulus zero();
  static ConcaveModulus linear(double l, double scale = 1.0);
  static ConcaveModulus log_splice(double delta, double scale = 1.0);
  static ConcaveModulus power(double p, double scale = 1.0);

  double operator()(double u) const;
  const std::string& name() const { return name_; }

  /// Whether \int_{0+} dy/rho(y) = +infinity for this registry entry
  /// (true for linear and log_splice, false for power and zero).
  bool divergent_at_zero() const { return divergent_; }

  bool is_zero() const { return kind_ == Kind::zero; }
  double splice_delta() const { return delta_; }

 private:
  enum class Kind { zero, linear, log_splice, power };

  ConcaveModulus(Kind kind, double a, double delta, double scale, bool divergent,
                 std::string name)
      : kind_(kind), a_(a), delta_(delta), scale_(scale), divergent_(divergent),
        name_(std::move(name)) {}

  Kind kind_;
  double a_ = 0.0;      // L for linear, p for power
  double delta_ = 0.0;  // splice point for log_splice
  double scale_ = 1.0;
  bool divergent_ = false;
  std::string name_;
};

/// g(t) <= h*(t) exp(\int_0^t lambda), h* the running max of h, the integral
/// by cumulative trapezoid on the grid.
std::vector<double> gronwall_bound(std::span<const double> h, std::span<const double> lam,
                                   const TimeGrid& grid);

/// g(t) <= G^{-1}(G(h*(t)) + \int_0^t lambda) with G(x) = \int_{x0}^x dy/rho(y).
/// Returns +infinity where the G^{-1} argument leaves G's range.
std::vector<double> bihari_bound(std::span<const double> h, std::span<const double> lam,
                                 const ConcaveModulus& rho, double x0, const TimeGrid& grid);

/// Continuity at the splice point, midpoint concavity, monotonicity, and
/// monotone growth of \int_eps^1 dy/rho over eps = 1e-2..1e-10 (the numeric
/// stand-in for divergence at 0+, which itself is not certifiable).
std::vector<CheckRow> modulus_check(const ConcaveModulus& rho);

namespace detail {
double modulus_integral_g(const ConcaveModulus& rho, double x0, double x);
double modulus_integral_g_inverse(const ConcaveModulus& rho, double x0, double target,
                                  double bracket_lo);
}  // namespace detail

}  // namespace nsfde::bihari
