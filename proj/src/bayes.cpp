#include "metamix/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "metamix/error.hpp"

namespace metamix {

namespace {

constexpr double kPruneWeight = 1e-12;
constexpr double kQuantileTol = 1e-12;
constexpr double kShortestTol = 1e-6;

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("credible level must lie in (0, 1)");
  }
}

struct ConditionalFit {
  double mean = 0.0;
  double variance = 0.0;
  double log_likelihood = 0.0;  // log p(y | tau) up to a constant
};

// Sums for the integrated likelihood with mu integrated out.
ConditionalFit conditional_fit(const Dataset& d, double tau, const EffectPrior& ep) {
  const double tau2 = tau * tau;
  double sum_w = 0.0;
  double sum_wy = 0.0;
  double sum_log_v = 0.0;
  for (const auto& s : d) {
    const double v = s.sigma * s.sigma + tau2;
    sum_w += 1.0 / v;
    sum_wy += s.y / v;
    sum_log_v += std::log(v);
  }
  const auto* normal = std::get_if<NormalEffect>(&ep);
  if (normal) {
    const double v = normal->sd * normal->sd;
    sum_w += 1.0 / v;
    sum_wy += normal->mean / v;
  }
  const double mean = sum_wy / sum_w;
  double rss = 0.0;
  for (const auto& s : d) {
    const double r = s.y - mean;
    rss += r * r / (s.sigma * s.sigma + tau2);
  }
  if (normal) {
    const double r = normal->mean - mean;
    rss += r * r / (normal->sd * normal->sd);
  }
  return {mean, 1.0 / sum_w, -0.5 * (sum_log_v + std::log(sum_w) + rss)};
}

struct GridPoint {
  double tau;
  double log_post;
  double mean;
  double variance;
};

GridPoint evaluate_node(const Model& model, double tau) {
  const auto fit = conditional_fit(model.data, tau, model.effect_prior);
  return {tau, tau_prior_log_density(model.tau_prior, tau) + fit.log_likelihood, fit.mean,
          fit.variance};
}

}  // namespace

// ---------------------------------------------------------------------------
// NormalMixture
// ---------------------------------------------------------------------------

NormalMixture::NormalMixture(std::vector<NormalComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("normal mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw DomainError("mixture weights must be positive");
    }
    if (!(c.sd > 0.0) || !std::isfinite(c.sd)) throw DomainError("mixture sds must be positive");
    if (!std::isfinite(c.mean)) throw DomainError("mixture means must be finite");
    total += c.weight;
  }
  for (auto& c : components_) c.weight /= total;
}

double mixture_density(const NormalMixture& m, double x) {
  double s = 0.0;
  for (const auto& c : m.components()) s += c.weight * normal_pdf((x - c.mean) / c.sd) / c.sd;
  return s;
}

double mixture_cdf(const NormalMixture& m, double x) {
  double s = 0.0;
  for (const auto& c : m.components()) s += c.weight * normal_cdf((x - c.mean) / c.sd);
  return std::clamp(s, 0.0, 1.0);
}

double mixture_quantile(const NormalMixture& m, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("mixture_quantile: p must lie in (0, 1)");
  const double z = normal_quantile(p);
  if (m.size() == 1) {
    const auto& c = m.components()[0];
    return c.mean + c.sd * z;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double max_sd = 0.0;
  for (const auto& c : m.components()) {
    lo = std::min(lo, c.mean + c.sd * z);
    hi = std::max(hi, c.mean + c.sd * z);
    max_sd = std::max(max_sd, c.sd);
  }
  // Rounding can put the CDF at an extreme quantile marginally on the wrong
  // side of p; a small widening restores the sign change.
  const double pad = 1e-6 * max_sd;
  return find_root([&](double x) { return mixture_cdf(m, x) - p; }, {lo - pad, hi + pad},
                   kQuantileTol);
}

Interval credible_interval(const NormalMixture& m, double level, IntervalKind kind) {
  require_level(level);
  if (kind == IntervalKind::central) {
    return {mixture_quantile(m, 0.5 * (1.0 - level)), mixture_quantile(m, 0.5 * (1.0 + level))};
  }
  const double slack = 1.0 - level;
  auto width = [&](double alpha) {
    return mixture_quantile(m, alpha + level) - mixture_quantile(m, alpha);
  };
  double alpha = minimize_scalar(width, {0.0, slack}, kShortestTol);

  // The width is flat at its minimum, so the endpoints are only good to about
  // tol / density. At an interior optimum the densities at both ends agree;
  // solving that condition pins the endpoints down to rounding.
  auto balance = [&](double a) {
    return mixture_density(m, mixture_quantile(m, a)) -
           mixture_density(m, mixture_quantile(m, a + level));
  };
  for (double delta = 10.0 * kShortestTol; delta <= 1e-2 * slack; delta *= 10.0) {
    const double lo = alpha - delta;
    const double hi = alpha + delta;
    if (lo <= 0.0 || hi >= slack) break;
    const double blo = balance(lo);
    const double bhi = balance(hi);
    if (blo < 0.0 && bhi > 0.0) {
      const double polished = find_root(balance, {lo, hi}, 1e-15);
      if (width(polished) <= width(alpha) * (1.0 + 1e-12)) alpha = polished;
      break;
    }
  }
  return {mixture_quantile(m, alpha), mixture_quantile(m, alpha + level)};
}

NormalMoments moment_matched_normal(const NormalMixture& m) {
  double mean = 0.0;
  for (const auto& c : m.components()) mean += c.weight * c.mean;
  // Centred form of sum w (s^2 + m^2) - mean^2, which avoids cancellation.
  double var = 0.0;
  for (const auto& c : m.components()) {
    const double dm = c.mean - mean;
    var += c.weight * (c.sd * c.sd + dm * dm);
  }
  return {mean, std::sqrt(var)};
}

// ---------------------------------------------------------------------------
// Conditional quantities
// ---------------------------------------------------------------------------

ConditionalMoments conditional_mu_moments(const Dataset& d, double tau, const EffectPrior& ep) {
  if (tau < 0.0) throw DomainError("tau must be nonnegative");
  const auto fit = conditional_fit(d, tau, ep);
  return {fit.mean, fit.variance};
}

double tau_log_marginal_posterior(const Model& model, double tau) {
  if (tau < 0.0) throw DomainError("tau must be nonnegative");
  return evaluate_node(model, tau).log_post;
}

double symmetrized_kl(double mean1, double var1, double mean2, double var2) noexcept {
  const double dm = mean1 - mean2;
  return 0.5 * (var1 / var2 + var2 / var1 - 2.0) + 0.5 * dm * dm * (1.0 / var1 + 1.0 / var2);
}

// ---------------------------------------------------------------------------
// Tau posterior
// ---------------------------------------------------------------------------

double tau_grid_upper(const Model& model, double tail_probability) {
  const auto& d = model.data;
  const double data_scale = 10.0 * (d.max_sigma() + d.y_range());
  const double upper = std::max(tau_prior_quantile(model.tau_prior, 1.0 - tail_probability),
                                data_scale);
  // Beyond a bounded prior support the posterior vanishes.
  return std::min(upper, tau_prior_support_upper(model.tau_prior));
}

TauPosterior build_tau_posterior(const Model& model, const GridOptions& options) {
  validate(model.tau_prior);
  validate(model.effect_prior);
  TauPosterior tp(model);

  if (const auto* pm = std::get_if<PointMass>(&model.tau_prior)) {
    tp.grid_ = {{pm->value, 0.0}};
    tp.weights_ = {1.0};
    tp.cumulative_ = {1.0};
    tp.log_normalizer_ = 0.0;
    return tp;
  }

  const double tau_max = tau_grid_upper(model, options.tail_probability);

  // Seed: equispaced nodes plus prior quantiles, so narrow prior features are
  // resolved before refinement starts.
  std::vector<double> seeds;
  constexpr int kSeedPanels = 32;
  for (int i = 0; i <= kSeedPanels; ++i) seeds.push_back(tau_max * i / kSeedPanels);
  for (double q : {1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99,
                   0.999}) {
    const double t = tau_prior_quantile(model.tau_prior, q);
    if (t > 0.0 && t < tau_max) seeds.push_back(t);
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::vector<GridPoint> nodes;
  nodes.reserve(seeds.size());
  for (double t : seeds) nodes.push_back(evaluate_node(model, t));

  auto max_log_post = [&] {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& n : nodes) m = std::max(m, n.log_post);
    if (!std::isfinite(m)) throw NumericalError("tau posterior vanishes on the whole grid");
    return m;
  };

  std::vector<char> split;
  while (true) {
    const double peak = max_log_post();
    const std::size_t panels = nodes.size() - 1;
    std::vector<double> mass(panels);
    double total = 0.0;
    for (std::size_t j = 0; j < panels; ++j) {
      const double h = nodes[j + 1].tau - nodes[j].tau;
      mass[j] = 0.5 * h *
                (std::exp(nodes[j].log_post - peak) + std::exp(nodes[j + 1].log_post - peak));
      total += mass[j];
    }
    split.assign(panels, 0);
    std::size_t n_split = 0;
    for (std::size_t j = 0; j < panels; ++j) {
      const bool too_heavy = mass[j] > options.max_mass_share * total;
      const bool too_far = symmetrized_kl(nodes[j].mean, nodes[j].variance, nodes[j + 1].mean,
                                          nodes[j + 1].variance) > options.max_kl;
      if (too_heavy || too_far) {
        split[j] = 1;
        ++n_split;
      }
    }
    if (n_split == 0) break;
    if (nodes.size() + n_split > options.max_nodes) {
      throw NumericalError("tau grid refinement exceeded " + std::to_string(options.max_nodes) +
                           " nodes");
    }
    std::vector<GridPoint> refined;
    refined.reserve(nodes.size() + n_split);
    for (std::size_t j = 0; j < panels; ++j) {
      refined.push_back(nodes[j]);
      if (split[j]) {
        const double mid = 0.5 * (nodes[j].tau + nodes[j + 1].tau);
        if (!(mid > nodes[j].tau && mid < nodes[j + 1].tau)) {
          throw NumericalError("tau grid refinement reached floating-point resolution");
        }
        refined.push_back(evaluate_node(model, mid));
      }
    }
    refined.push_back(nodes.back());
    nodes = std::move(refined);
  }

  // Normalize by adaptive quadrature panel by panel; the per-panel integrals
  // also give the CDF at every node.
  const double peak = max_log_post();
  const std::size_t panels = nodes.size() - 1;
  double trapezoid_total = 0.0;
  std::vector<double> node_mass(nodes.size(), 0.0);
  for (std::size_t j = 0; j < panels; ++j) {
    const double h = nodes[j + 1].tau - nodes[j].tau;
    const double a = std::exp(nodes[j].log_post - peak);
    const double b = std::exp(nodes[j + 1].log_post - peak);
    node_mass[j] += 0.5 * h * a;
    node_mass[j + 1] += 0.5 * h * b;
    trapezoid_total += 0.5 * h * (a + b);
  }
  auto scaled = [&](double t) { return std::exp(evaluate_node(model, t).log_post - peak); };
  std::vector<double> cumulative(nodes.size(), 0.0);
  const double abs_tol = options.normalization_rel_tol * trapezoid_total / panels;
  for (std::size_t j = 0; j < panels; ++j) {
    cumulative[j + 1] = cumulative[j] + integrate(scaled, {nodes[j].tau, nodes[j + 1].tau},
                                                  options.normalization_rel_tol, abs_tol);
  }
  const double z = cumulative.back();
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("tau posterior is not normalizable");
  for (auto& c : cumulative) c /= z;
  cumulative.back() = 1.0;

  tp.log_normalizer_ = peak + std::log(z);
  tp.grid_.reserve(nodes.size());
  tp.weights_.reserve(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    tp.grid_.push_back({nodes[j].tau, nodes[j].log_post - tp.log_normalizer_});
    tp.weights_.push_back(node_mass[j] / trapezoid_total);
  }
  tp.cumulative_ = std::move(cumulative);
  return tp;
}

double TauPosterior::normalization_constant() const noexcept {
  return std::exp(log_normalizer_);
}

double TauPosterior::raw_density(double tau) const {
  return std::exp(tau_log_marginal_posterior(model_, tau) - log_normalizer_);
}

double TauPosterior::density(double tau) const {
  if (degenerate()) {
    throw DomainError("a fixed-tau posterior has no density");
  }
  if (tau < 0.0 || tau > tau_max()) return 0.0;
  return raw_density(tau);
}

double TauPosterior::cdf(double tau) const {
  if (degenerate()) return tau >= grid_[0].tau ? 1.0 : 0.0;
  if (tau <= 0.0) return 0.0;
  if (tau >= tau_max()) return 1.0;
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), tau,
                                   [](double t, const TauNode& n) { return t < n.tau; });
  const auto j = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double partial = integrate([this](double t) { return raw_density(t); },
                                   {grid_[j].tau, tau}, 1e-10, 1e-14);
  return std::clamp(cumulative_[j] + partial, 0.0, 1.0);
}

double TauPosterior::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("tau quantile: p must lie in (0, 1)");
  if (degenerate()) return grid_[0].tau;
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
  const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin(), 1));
  const Interval bracket{grid_[j - 1].tau, grid_[j].tau};
  return find_root([&](double t) { return cdf(t) - p; }, bracket, 1e-13 * tau_max());
}

double TauPosterior::moment(int order) const {
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < grid_.size(); ++j) {
    s += integrate([&](double t) { return std::pow(t, order) * raw_density(t); },
                   {grid_[j].tau, grid_[j + 1].tau}, 1e-10, 1e-14 * std::pow(tau_max(), order));
  }
  return s;
}

double TauPosterior::mean() const {
  if (degenerate()) return grid_[0].tau;
  return moment(1);
}

double TauPosterior::sd() const {
  if (degenerate()) return 0.0;
  const double m = moment(1);
  return std::sqrt(std::max(0.0, moment(2) - m * m));
}

// ---------------------------------------------------------------------------
// Derived mixtures
// ---------------------------------------------------------------------------

namespace {

template <class ComponentFn>
NormalMixture mixture_over_grid(const TauPosterior& tp, ComponentFn component) {
  std::vector<NormalComponent> comps;
  comps.reserve(tp.grid().size());
  const auto weights = tp.node_weights();
  for (std::size_t j = 0; j < tp.grid().size(); ++j) {
    if (weights[j] <= kPruneWeight) continue;
    const double tau = tp.grid()[j].tau;
    const auto cm = conditional_mu_moments(tp.model().data, tau, tp.model().effect_prior);
    auto [mean, sd] = component(tau, cm);
    comps.push_back({weights[j], mean, sd});
  }
  return NormalMixture(std::move(comps));
}

}  // namespace

NormalMixture mu_marginal_mixture(const TauPosterior& tp) {
  return mixture_over_grid(tp, [](double, const ConditionalMoments& cm) {
    return std::pair{cm.mean, std::sqrt(cm.variance)};
  });
}

NormalMixture mu_marginal_mixture(const Model& model) {
  return mu_marginal_mixture(build_tau_posterior(model));
}

NormalMixture predictive_mixture(const TauPosterior& tp) {
  return mixture_over_grid(tp, [](double tau, const ConditionalMoments& cm) {
    return std::pair{cm.mean, std::sqrt(cm.variance + tau * tau)};
  });
}

NormalMixture predictive_mixture(const Model& model) {
  return predictive_mixture(build_tau_posterior(model));
}

NormalMixture shrinkage_mixture(const TauPosterior& tp, std::size_t study_index) {
  const auto& d = tp.model().data;
  if (study_index >= d.size()) {
    throw DataError("study index " + std::to_string(study_index) + " out of range (k = " +
                    std::to_string(d.size()) + ")");
  }
  const Study& s = d[study_index];
  const double s2 = s.sigma * s.sigma;
  return mixture_over_grid(tp, [&](double tau, const ConditionalMoments& cm) {
    // Weight of the study's own estimate; 0 at tau = 0, -> 1 as tau grows.
    const double b = tau * tau / (s2 + tau * tau);
    const double mean = b * s.y + (1.0 - b) * cm.mean;
    const double var = s2 * b + (1.0 - b) * (1.0 - b) * cm.variance;
    return std::pair{mean, std::sqrt(var)};
  });
}

NormalMixture shrinkage_mixture(const Model& model, std::size_t study_index) {
  return shrinkage_mixture(build_tau_posterior(model), study_index);
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

PosteriorSummary tau_posterior_summary(const TauPosterior& tp, double level) {
  require_level(level);
  PosteriorSummary s;
  s.level = level;
  s.interval_kind = IntervalKind::central;
  s.mean = tp.mean();
  s.sd = tp.sd();
  s.median = tp.quantile(0.5);
  s.interval = {tp.quantile(0.5 * (1.0 - level)), tp.quantile(0.5 * (1.0 + level))};
  return s;
}

PosteriorSummary mixture_summary(const NormalMixture& m, double level, IntervalKind kind) {
  require_level(level);
  const auto mm = moment_matched_normal(m);
  PosteriorSummary s;
  s.mean = mm.mean;
  s.sd = mm.sd;
  s.median = mixture_quantile(m, 0.5);
  s.interval = credible_interval(m, level, kind);
  s.level = level;
  s.interval_kind = kind;
  return s;
}

}  // namespace metamix
