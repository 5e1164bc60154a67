#pragma once

// Special functions, scalar root finding / minimization and adaptive
// quadrature. Everything here is pure and reentrant.

#include <functional>

namespace metamix {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

using ScalarFunction = std::function<double(double)>;

namespace tolerances {
inline constexpr double kRoot = 1e-12;
inline constexpr double kMinimize = 1e-8;
inline constexpr double kIntegrateRel = 1e-10;
inline constexpr int kIntegrateMaxDepth = 60;
}  // namespace tolerances

double normal_pdf(double x) noexcept;
double normal_log_pdf(double x) noexcept;

/// Standard normal CDF, absolute error below 1e-14.
double normal_cdf(double x) noexcept;

/// Upper tail 1 - Phi(x) without cancellation.
double normal_ccdf(double x) noexcept;

/// Inverse of normal_cdf; throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

double chisq_cdf(double x, double dof);
double chisq_quantile(double p, double dof);

double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

/// Brent's method. Requires f(lo) and f(hi) of opposite sign (or zero);
/// otherwise throws NumericalError. The returned point lies in a bracket
/// no wider than tol (plus a few ulps of |x|).
double find_root(const ScalarFunction& f, Interval bracket,
                 double tol = tolerances::kRoot);

/// Golden-section search. For a unimodal f the result is within tol of the
/// minimizer; otherwise some local minimizer is returned. Endpoints are
/// never evaluated.
double minimize_scalar(const ScalarFunction& f, Interval bracket,
                       double tol = tolerances::kMinimize);

/// Adaptive Simpson quadrature with Richardson correction. A panel is
/// accepted once its error estimate is below max(abs_tol, rel_tol * |I|),
/// where I is a coarse estimate of the whole integral. Throws
/// NumericalError when max_depth bisections do not suffice.
double integrate(const ScalarFunction& f, Interval interval,
                 double rel_tol = tolerances::kIntegrateRel,
                 double abs_tol = 0.0,
                 int max_depth = tolerances::kIntegrateMaxDepth);

}  // namespace metamix
