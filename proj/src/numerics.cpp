#include "metamix/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "metamix/error.hpp"

namespace metamix {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kSpecialMaxIter = 10000;

bool open_probability(double p) { return p > 0.0 && p < 1.0; }

void require_probability(double p, const char* what) {
  if (!open_probability(p)) {
    throw DomainError(std::string(what) + ": probability must lie in (0, 1), got " +
                      std::to_string(p));
  }
}

void require_dof(double dof, const char* what) {
  if (!(dof > 0.0) || !std::isfinite(dof)) {
    throw DomainError(std::string(what) + ": degrees of freedom must be positive");
  }
}

// Acklam's rational approximation to the normal quantile, |rel err| < 1.2e-9.
double acklam_quantile(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kSpecialMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericalError("gamma_p: series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kSpecialMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw NumericalError("gamma_q: continued fraction did not converge");
}

double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kSpecialMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete_beta: continued fraction did not converge");
}

// Safeguarded Newton iteration for cdf(x) = p on [lo, hi], where
// cdf(lo) <= p <= cdf(hi). Falls back to bisection whenever the Newton step
// leaves the current bracket.
template <class Cdf, class Pdf>
double invert_cdf(Cdf cdf, Pdf pdf, double p, double x, double lo, double hi) {
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double err = cdf(x) - p;
    if (err == 0.0) return x;
    if (err < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dens = pdf(x);
    double next = (dens > 0.0 && std::isfinite(dens)) ? x - err / dens : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    // Relative stopping rule: quantiles near 0 (small dof, small p) need it.
    const double scale = 4.0 * kEps * std::abs(x) + std::numeric_limits<double>::min();
    if (std::abs(next - x) <= scale || hi - lo <= scale) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_log_pdf(double x) noexcept {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_ccdf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  require_probability(p, "normal_quantile");
  // 1 - p is exact for p >= 0.5, so refine in the lower tail only.
  if (p > 0.5) return -normal_quantile(1.0 - p);
  double x = acklam_quantile(p);
  // One Halley step on Phi(x) - p.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_p: shape must be positive");
  if (x < 0.0) throw DomainError("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw DomainError("gamma_q: shape must be positive");
  if (x < 0.0) throw DomainError("gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a, b must be positive");
  if (x < 0.0 || x > 1.0) throw DomainError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double chisq_cdf(double x, double dof) {
  require_dof(dof, "chisq_cdf");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chisq_quantile(double p, double dof) {
  require_probability(p, "chisq_quantile");
  require_dof(dof, "chisq_quantile");
  const double a = 0.5 * dof;
  const double log_norm = -a * std::log(2.0) - std::lgamma(a);
  auto cdf = [&](double x) { return gamma_p(a, 0.5 * x); };
  auto pdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(log_norm + (a - 1.0) * std::log(x) - 0.5 * x);
  };

  // Wilson-Hilferty starting value.
  const double z = normal_quantile(p);
  const double h = 2.0 / (9.0 * dof);
  double x0 = dof * std::pow(1.0 - h + z * std::sqrt(h), 3);
  if (!(x0 > 0.0)) x0 = dof * 1e-3;

  double hi = std::max(x0, 1.0);
  while (cdf(hi) < p) hi *= 2.0;
  return invert_cdf(cdf, pdf, p, x0, 0.0, hi);
}

double student_t_cdf(double t, double dof) {
  require_dof(dof, "student_t_cdf");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double dof) {
  require_probability(p, "student_t_quantile");
  require_dof(dof, "student_t_quantile");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, dof);

  const double log_norm = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                          0.5 * std::log(dof * std::numbers::pi);
  auto cdf = [&](double t) { return student_t_cdf(t, dof); };
  auto pdf = [&](double t) {
    return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(t * t / dof));
  };
  const double x0 = normal_quantile(p);
  double hi = std::max(2.0 * x0, 1.0);
  while (cdf(hi) < p) hi *= 2.0;
  return invert_cdf(cdf, pdf, p, x0, 0.0, hi);
}

double find_root(const ScalarFunction& f, Interval bracket, double tol) {
  if (!(tol > 0.0)) throw DomainError("find_root: tolerance must be positive");
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw NumericalError("find_root: no sign change on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  }

  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 1000; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    // The bracket is [b, c]; stop once it is no wider than tol.
    const double tol1 = std::max(0.5 * tol, 2.0 * kEps * std::abs(b));
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (m > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  throw NumericalError("find_root: iteration limit reached");
}

double minimize_scalar(const ScalarFunction& f, Interval bracket, double tol) {
  if (!(tol > 0.0)) throw DomainError("minimize_scalar: tolerance must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = bracket.lo;
  double b = bracket.hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
    if (x1 == a && x2 == b) break;  // bracket at floating-point resolution
  }
  return 0.5 * (a + b);
}

namespace {

struct SimpsonPanel {
  double a, fa, m, fm, b, fb, whole;
};

double adaptive_simpson(const ScalarFunction& f, const SimpsonPanel& p, double eps,
                        double eps_floor, double rel_tol, int depth, int max_depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  if (depth >= max_depth || !(lm > p.a && lm < p.m && rm > p.m && rm < p.b)) {
    throw NumericalError("integrate: subdivision depth limit reached near x = " +
                         std::to_string(p.m));
  }
  const double flm = f(lm);
  const double frm = f(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm)) {
    throw NumericalError("integrate: non-finite integrand near x = " + std::to_string(p.m));
  }
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  // The local relative term rescues peaks the coarse pass missed, where the
  // global budget would otherwise shrink to nothing.
  const double local = rel_tol * std::abs(left + right);
  if (std::abs(delta) <= 15.0 * std::max(eps, local)) return left + right + delta / 15.0;
  const double half = std::max(0.5 * eps, eps_floor);
  return adaptive_simpson(f, {p.a, p.fa, lm, flm, p.m, p.fm, left}, half, eps_floor,
                          rel_tol, depth + 1, max_depth) +
         adaptive_simpson(f, {p.m, p.fm, rm, frm, p.b, p.fb, right}, half, eps_floor,
                          rel_tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const ScalarFunction& f, Interval interval, double rel_tol, double abs_tol,
                 int max_depth) {
  if (!(rel_tol > 0.0)) throw DomainError("integrate: rel_tol must be positive");
  if (!(interval.lo <= interval.hi)) throw DomainError("integrate: reversed interval");
  if (interval.lo == interval.hi) return 0.0;

  // A coarse pass over a few panels sets the scale for the relative tolerance.
  constexpr int kPanels = 8;
  const double h = interval.width() / kPanels;
  std::array<double, 2 * kPanels + 1> fx{};
  for (int i = 0; i <= 2 * kPanels; ++i) {
    const double x = i == 2 * kPanels ? interval.hi : interval.lo + 0.5 * h * i;
    fx[i] = f(x);
    if (!std::isfinite(fx[i])) {
      throw NumericalError("integrate: non-finite integrand at x = " + std::to_string(x));
    }
  }
  std::array<SimpsonPanel, kPanels> panels{};
  double coarse = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double a = interval.lo + h * i;
    const double b = i == kPanels - 1 ? interval.hi : interval.lo + h * (i + 1);
    const double m = 0.5 * (a + b);
    const double s = (b - a) / 6.0 * (fx[2 * i] + 4.0 * fx[2 * i + 1] + fx[2 * i + 2]);
    panels[i] = {a, fx[2 * i], m, fx[2 * i + 1], b, fx[2 * i + 2], s};
    coarse += std::abs(s);
  }
  const double eps = std::max(abs_tol, rel_tol * coarse) / kPanels;
  const double eps_floor = 16.0 * kEps * coarse / kPanels;
  double total = 0.0;
  for (const auto& panel : panels) {
    total += adaptive_simpson(f, panel, eps, eps_floor, rel_tol, 0, max_depth);
  }
  return total;
}

}  // namespace metamix
