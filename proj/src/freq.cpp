#include "metamix/freq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metamix/error.hpp"

namespace metamix {

namespace {

struct WeightedFit {
  double mean = 0.0;
  double sum_w = 0.0;
  double q = 0.0;
};

WeightedFit weighted_fit(const Dataset& d, double tau) {
  const double tau2 = tau * tau;
  double sum_w = 0.0;
  double sum_wy = 0.0;
  for (const auto& s : d) {
    const double w = 1.0 / (s.sigma * s.sigma + tau2);
    sum_w += w;
    sum_wy += w * s.y;
  }
  const double mean = sum_wy / sum_w;
  double q = 0.0;
  for (const auto& s : d) {
    const double r = s.y - mean;
    q += r * r / (s.sigma * s.sigma + tau2);
  }
  return {mean, sum_w, q};
}

void require_two(const Dataset& d, const char* what) {
  if (d.size() < 2) {
    throw DataError(std::string(what) + ": needs at least 2 studies, got " +
                    std::to_string(d.size()));
  }
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
}

double search_upper(const Dataset& d) { return 10.0 * (d.max_sigma() + d.y_range()); }

// Derivative of the restricted log-likelihood with respect to tau^2, times 2.
double reml_score(const Dataset& d, double tau) {
  const auto fit = weighted_fit(d, tau);
  const double tau2 = tau * tau;
  double sum_w2 = 0.0;
  double sum_w2r2 = 0.0;
  for (const auto& s : d) {
    const double w = 1.0 / (s.sigma * s.sigma + tau2);
    const double r = s.y - fit.mean;
    sum_w2 += w * w;
    sum_w2r2 += w * w * r * r;
  }
  return sum_w2r2 - fit.sum_w + sum_w2 / fit.sum_w;
}

FrequentistResult normal_result(const Dataset& d, double tau, double level, FreqMethod method) {
  const auto fit = weighted_fit(d, tau);
  const double se = 1.0 / std::sqrt(fit.sum_w);
  const double z = normal_quantile(0.5 * (1.0 + level));
  FrequentistResult r;
  r.mu_hat = fit.mean;
  r.se_mu = se;
  r.interval = {fit.mean - z * se, fit.mean + z * se};
  r.level = level;
  r.tau_hat = tau;
  r.q_statistic = d.size() >= 2 ? q_statistic(d, 0.0) : 0.0;
  r.method = method;
  return r;
}

}  // namespace

std::string_view to_string(FreqMethod m) noexcept {
  switch (m) {
    case FreqMethod::common: return "common";
    case FreqMethod::dl: return "dl";
    case FreqMethod::reml: return "reml";
    case FreqMethod::hksj: return "hksj";
  }
  return "?";
}

std::string_view to_string(TauMethod m) noexcept {
  return m == TauMethod::dl ? "dl" : "reml";
}

double q_statistic(const Dataset& d, double tau) {
  require_two(d, "q_statistic");
  if (tau < 0.0) throw DomainError("tau must be nonnegative");
  return weighted_fit(d, tau).q;
}

double dl_tau(const Dataset& d) {
  require_two(d, "dl_tau");
  double s1 = 0.0;
  double s2 = 0.0;
  for (const auto& s : d) {
    const double w = 1.0 / (s.sigma * s.sigma);
    s1 += w;
    s2 += w * w;
  }
  const double q = q_statistic(d, 0.0);
  const double k1 = static_cast<double>(d.size() - 1);
  const double tau2 = std::max(0.0, (q - k1) / (s1 - s2 / s1));
  return std::sqrt(tau2);
}

double restricted_log_likelihood(const Dataset& d, double tau) {
  const double tau2 = tau * tau;
  double sum_log_v = 0.0;
  for (const auto& s : d) sum_log_v += std::log(s.sigma * s.sigma + tau2);
  const auto fit = weighted_fit(d, tau);
  return -0.5 * (sum_log_v + std::log(fit.sum_w) + fit.q);
}

double reml_tau(const Dataset& d) {
  require_two(d, "reml_tau");
  const double upper = search_upper(d);
  // Tolerance proportional to the search range keeps the estimate scale
  // equivariant.
  const double tol = 1e-10 * upper;
  auto neg = [&](double t) { return -restricted_log_likelihood(d, t); };
  const double t = minimize_scalar(neg, {0.0, upper}, tol);

  // Function values cannot separate a boundary maximum from a tiny interior
  // one, so the boundary is decided by the sign of the score at tau^2 = 0.
  // A non-positive score makes 0 a local maximum; an interior mode must then
  // beat it by more than rounding.
  auto score = [&](double x) { return reml_score(d, x); };
  const bool rising_at_zero = score(0.0) > 0.0;
  if (!rising_at_zero) {
    const double f0 = neg(0.0);
    if (!(neg(t) < f0 - 1e-12 * std::abs(f0))) return 0.0;
  }

  // Golden section only resolves the optimum to about sqrt(eps) relative,
  // because the objective is flat there. Polish on the score, which changes
  // sign cleanly.
  for (double delta = 1e-6 * upper; delta <= 1e-2 * upper; delta *= 10.0) {
    const double lo = std::max(0.0, t - delta);
    const double hi = std::min(upper, t + delta);
    if ((lo > 0.0 || rising_at_zero) && score(lo) > 0.0 && score(hi) < 0.0) {
      return find_root(score, {lo, hi}, 1e-15 * upper);
    }
  }
  return t;
}

double estimate_tau(const Dataset& d, TauMethod m) {
  return m == TauMethod::dl ? dl_tau(d) : reml_tau(d);
}

FrequentistResult common_effect(const Dataset& d, double level) {
  require_level(level);
  auto r = normal_result(d, 0.0, level, FreqMethod::common);
  r.tau_interval = {0.0, 0.0};
  return r;
}

FrequentistResult random_effects_normal(const Dataset& d, TauMethod tau_method, double level) {
  require_level(level);
  require_two(d, "random_effects_normal");
  const double tau = estimate_tau(d, tau_method);
  auto r = normal_result(d, tau, level,
                         tau_method == TauMethod::dl ? FreqMethod::dl : FreqMethod::reml);
  r.tau_interval = q_profile_interval(d, level);
  return r;
}

FrequentistResult hksj_interval(const Dataset& d, TauMethod tau_method, double level,
                                bool modified) {
  require_level(level);
  require_two(d, "hksj_interval");
  const double tau = estimate_tau(d, tau_method);
  const auto fit = weighted_fit(d, tau);
  const double k1 = static_cast<double>(d.size() - 1);
  double scale = fit.q / k1;
  if (modified) scale = std::max(scale, 1.0);
  const double se = std::sqrt(scale / fit.sum_w);
  const double t = student_t_quantile(0.5 * (1.0 + level), k1);

  FrequentistResult r;
  r.mu_hat = fit.mean;
  r.se_mu = se;
  r.interval = {fit.mean - t * se, fit.mean + t * se};
  r.level = level;
  r.tau_hat = tau;
  r.tau_interval = q_profile_interval(d, level);
  r.q_statistic = q_statistic(d, 0.0);
  r.method = FreqMethod::hksj;
  r.degenerate = se == 0.0;
  return r;
}

Interval q_profile_interval(const Dataset& d, double level) {
  require_level(level);
  require_two(d, "q_profile_interval");
  const double dof = static_cast<double>(d.size() - 1);
  const double q0 = q_statistic(d, 0.0);

  auto solve = [&](double target) {
    if (q0 <= target) return 0.0;
    double hi = std::max(search_upper(d), 1e-8);
    for (int i = 0; q_statistic(d, hi) > target; ++i) {
      if (i > 200) throw NumericalError("q_profile_interval: cannot bracket upper bound");
      hi *= 2.0;
    }
    return find_root([&](double t) { return q_statistic(d, t) - target; }, {0.0, hi},
                     1e-12 * hi);
  };

  const double lower = solve(chisq_quantile(0.5 * (1.0 + level), dof));
  const double upper = solve(chisq_quantile(0.5 * (1.0 - level), dof));
  return {lower, upper};
}

}  // namespace metamix
