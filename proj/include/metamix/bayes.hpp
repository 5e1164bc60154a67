#pragma once

// Exact inference for the normal-normal hierarchical model
//
//   y_i | theta_i ~ N(theta_i, sigma_i^2),   theta_i | mu, tau ~ N(mu, tau^2)
//
// Conditional on tau everything is conjugate, so the marginal posterior of
// the effect mu is a continuous mixture of normals over the posterior of tau.
// The tau posterior is evaluated on an adaptive grid and the mixture is
// discretized on the same grid, which keeps adjacent mixture components
// within a bounded symmetrized KL divergence of each other.

#include <cstddef>
#include <span>
#include <vector>

#include "metamix/data.hpp"
#include "metamix/numerics.hpp"
#include "metamix/priors.hpp"

namespace metamix {

struct Model {
  Dataset data;
  HeterogeneityPrior tau_prior;
  EffectPrior effect_prior = ImproperUniform{};
};

enum class IntervalKind { shortest, central };

// ---------------------------------------------------------------------------
// Normal mixtures
// ---------------------------------------------------------------------------

struct NormalComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sd = 1.0;
};

/// Finite mixture of normals. The constructor rejects nonpositive weights or
/// sds and non-finite means, then renormalizes the weights to sum to one.
class NormalMixture {
 public:
  explicit NormalMixture(std::vector<NormalComponent> components);

  std::span<const NormalComponent> components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }

 private:
  std::vector<NormalComponent> components_;
};

double mixture_density(const NormalMixture& m, double x);
double mixture_cdf(const NormalMixture& m, double x);
/// Inverse CDF by Brent's method between the extreme component quantiles.
double mixture_quantile(const NormalMixture& m, double p);

/// Central interval, or the shortest interval found by minimizing the width
/// over the lower-tail mass.
Interval credible_interval(const NormalMixture& m, double level, IntervalKind kind);

struct NormalMoments {
  double mean = 0.0;
  double sd = 0.0;
};

/// Normal with the mixture's mean and variance.
NormalMoments moment_matched_normal(const NormalMixture& m);

// ---------------------------------------------------------------------------
// Conditional (given tau) quantities
// ---------------------------------------------------------------------------

struct ConditionalMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Posterior mean and variance of mu given tau. A normal effect prior enters
/// as an extra pseudo-study whose variance is not inflated by tau.
ConditionalMoments conditional_mu_moments(const Dataset& d, double tau, const EffectPrior& ep);

/// log p(tau) + log p(y | tau), up to an additive constant. Requires a tau
/// prior with a density (not PointMass).
double tau_log_marginal_posterior(const Model& model, double tau);

/// Symmetrized (Jeffreys) KL divergence between two normals.
double symmetrized_kl(double mean1, double var1, double mean2, double var2) noexcept;

// ---------------------------------------------------------------------------
// Tau posterior
// ---------------------------------------------------------------------------

struct GridOptions {
  double max_kl = 1e-3;           // between adjacent conditional mu components
  double max_mass_share = 1e-2;   // per trapezoid panel
  double tail_probability = 1e-7; // prior mass beyond the grid
  std::size_t max_nodes = 10000;
  double normalization_rel_tol = 1e-8;
};

struct TauNode {
  double tau = 0.0;
  double log_density = 0.0;  // normalized
};

class TauPosterior {
 public:
  const Model& model() const noexcept { return model_; }
  std::span<const TauNode> grid() const noexcept { return grid_; }
  /// Normalized trapezoidal mass attached to each grid node.
  std::span<const double> node_weights() const noexcept { return weights_; }

  /// log of the integral of exp(tau_log_marginal_posterior) over the grid range.
  double log_normalizer() const noexcept { return log_normalizer_; }
  double normalization_constant() const noexcept;

  /// PointMass prior: a single node carrying all mass.
  bool degenerate() const noexcept { return grid_.size() == 1; }
  double tau_max() const noexcept { return grid_.back().tau; }

  double density(double tau) const;
  double cdf(double tau) const;
  double quantile(double p) const;
  double mean() const;
  double sd() const;

 private:
  friend TauPosterior build_tau_posterior(const Model&, const GridOptions&);
  explicit TauPosterior(Model model) : model_(std::move(model)) {}

  double raw_density(double tau) const;
  double moment(int order) const;

  Model model_;
  std::vector<TauNode> grid_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // CDF at grid nodes
  double log_normalizer_ = 0.0;
};

/// Adaptive grid on [0, tau_max]; throws NumericalError if refinement would
/// exceed GridOptions::max_nodes.
TauPosterior build_tau_posterior(const Model& model, const GridOptions& options = {});

/// Upper end of the tau grid for a model.
double tau_grid_upper(const Model& model, double tail_probability = 1e-7);

// ---------------------------------------------------------------------------
// Mixtures derived from the tau posterior
// ---------------------------------------------------------------------------

NormalMixture mu_marginal_mixture(const TauPosterior& tp);
NormalMixture mu_marginal_mixture(const Model& model);

/// Distribution of the effect in a new study.
NormalMixture predictive_mixture(const TauPosterior& tp);
NormalMixture predictive_mixture(const Model& model);

/// Posterior of the study-specific effect theta_i; throws DataError on a bad
/// index.
NormalMixture shrinkage_mixture(const TauPosterior& tp, std::size_t study_index);
NormalMixture shrinkage_mixture(const Model& model, std::size_t study_index);

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

struct PosteriorSummary {
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  Interval interval;
  double level = 0.95;
  IntervalKind interval_kind = IntervalKind::central;
};

/// Median and central interval from the integrated CDF; mean and sd by
/// quadrature.
PosteriorSummary tau_posterior_summary(const TauPosterior& tp, double level);

PosteriorSummary mixture_summary(const NormalMixture& m, double level, IntervalKind kind);

}  // namespace metamix
