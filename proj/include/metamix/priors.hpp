#pragma once

#include <limits>
#include <variant>

namespace metamix {

// ---------------------------------------------------------------------------
// Effect (mu) priors
// ---------------------------------------------------------------------------

struct ImproperUniform {};

struct NormalEffect {
  double mean = 0.0;
  double sd = 1.0;
};

using EffectPrior = std::variant<ImproperUniform, NormalEffect>;

// ---------------------------------------------------------------------------
// Heterogeneity (tau) priors, all supported on [0, inf)
// ---------------------------------------------------------------------------

struct HalfNormal {
  double scale = 0.5;
};

struct HalfCauchy {
  double scale = 1.0;
};

struct UniformTau {
  double upper = 1.0;
};

struct LogNormal {
  double mu_log = 0.0;
  double sd_log = 1.0;

  /// Log-normal with the given sd_log whose q-quantile equals value.
  static LogNormal from_quantile(double q, double value, double sd_log);
};

/// Degenerate prior fixing tau; never evaluated as a density.
struct PointMass {
  double value = 0.0;
};

using HeterogeneityPrior = std::variant<HalfNormal, HalfCauchy, UniformTau, LogNormal, PointMass>;

/// Throws DomainError on nonpositive scales.
void validate(const HeterogeneityPrior& p);
void validate(const EffectPrior& p);

inline bool is_point_mass(const HeterogeneityPrior& p) noexcept {
  return std::holds_alternative<PointMass>(p);
}

/// Density on tau >= 0; throws DomainError for PointMass or tau < 0.
double tau_prior_density(const HeterogeneityPrior& p, double tau);
/// log of tau_prior_density, -inf outside the support.
double tau_prior_log_density(const HeterogeneityPrior& p, double tau);
double tau_prior_cdf(const HeterogeneityPrior& p, double tau);
/// Inverse CDF for 0 < q < 1. PointMass returns its value for every q.
double tau_prior_quantile(const HeterogeneityPrior& p, double q);

/// Right end of the support (infinity unless UniformTau or PointMass).
double tau_prior_support_upper(const HeterogeneityPrior& p) noexcept;

/// Same family, every scale parameter multiplied by c > 0.
HeterogeneityPrior rescaled(const HeterogeneityPrior& p, double c);

}  // namespace metamix
