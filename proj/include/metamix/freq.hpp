#pragma once

// Frequentist random-effects estimates: common-effect pooling, DerSimonian-
// Laird and REML heterogeneity, Q-profile interval for tau, and normal or
// Hartung-Knapp-Sidik-Jonkman intervals for the effect.

#include <string_view>

#include "metamix/data.hpp"
#include "metamix/numerics.hpp"

namespace metamix {

enum class FreqMethod { common, dl, reml, hksj };
enum class TauMethod { dl, reml };

std::string_view to_string(FreqMethod m) noexcept;
std::string_view to_string(TauMethod m) noexcept;

struct FrequentistResult {
  double mu_hat = 0.0;
  double se_mu = 0.0;
  Interval interval;
  double level = 0.95;
  double tau_hat = 0.0;
  Interval tau_interval;  // Q-profile; [0, 0] for the common-effect model
  double q_statistic = 0.0;
  FreqMethod method = FreqMethod::common;
  // HKSJ only: the rescaled variance is zero, so the interval collapses.
  bool degenerate = false;
};

/// Q(tau) = sum w_i(tau) (y_i - mu_hat(tau))^2, w_i(tau) = 1/(sigma_i^2 + tau^2).
/// Non-increasing in tau. Requires k >= 2.
double q_statistic(const Dataset& d, double tau);

double dl_tau(const Dataset& d);

/// Maximizer of the restricted likelihood over [0, tau_max]; exactly 0 when
/// the boundary is at least as good as the interior optimum.
double reml_tau(const Dataset& d);

double estimate_tau(const Dataset& d, TauMethod m);

FrequentistResult common_effect(const Dataset& d, double level);

FrequentistResult random_effects_normal(const Dataset& d, TauMethod tau_method, double level);

/// With `modified`, the variance scale factor is floored at 1.
FrequentistResult hksj_interval(const Dataset& d, TauMethod tau_method, double level,
                                bool modified = false);

/// Inverts Q(tau) against chi-square quantiles with k - 1 degrees of freedom.
/// Bounds without a solution are truncated to 0.
Interval q_profile_interval(const Dataset& d, double level);

/// Restricted log-likelihood of tau (up to a constant).
double restricted_log_likelihood(const Dataset& d, double tau);

}  // namespace metamix
