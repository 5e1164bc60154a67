#pragma once

// Orchestration of a full comparative analysis: Bayesian mixture posterior
// next to the frequentist estimates, optionally on the most recent subset of
// studies and across several heterogeneity priors.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metamix/bayes.hpp"
#include "metamix/data.hpp"
#include "metamix/freq.hpp"

namespace metamix::io {

enum class Method { bayes, common, dl, reml, hksj };
enum class OutputFormat { json, text };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(IntervalKind k) noexcept;

/// Comma-separated list, e.g. "bayes,dl"; duplicates are dropped.
std::vector<Method> parse_methods(std::string_view text);
IntervalKind parse_interval_kind(std::string_view text);
/// "last:<n>"
std::size_t parse_subset(std::string_view text);

struct AnalysisConfig {
  std::string tau_prior_spec = "half-normal:0.5";
  std::string effect_prior_spec = "uniform";
  double level = 0.95;
  IntervalKind interval_kind = IntervalKind::shortest;
  std::vector<Method> methods = {Method::bayes, Method::reml};
  std::optional<std::size_t> subset_last;
  std::optional<std::filesystem::path> plot_path;
  OutputFormat output_format = OutputFormat::json;
  TauMethod hksj_tau_method = TauMethod::reml;
  bool hksj_modified = false;
  std::string input_path;

  /// Throws DomainError for an invalid level, prior spec or empty method list.
  void validate() const;
  bool has(Method m) const;
};

struct MethodBlock {
  Method method = Method::bayes;
  double estimate = 0.0;
  double se_or_sd = 0.0;
  Interval interval;
  double level = 0.95;
  // Bayesian blocks
  std::optional<double> posterior_mean;
  std::optional<IntervalKind> interval_kind;
  // Frequentist random-effects blocks
  std::optional<double> tau_hat;
  std::optional<TauMethod> tau_method;
  bool degenerate = false;
};

struct TauBlock {
  std::optional<double> estimate;
  std::optional<TauMethod> estimate_method;
  std::optional<Interval> interval;  // Q-profile
  std::optional<double> posterior_median;
  std::optional<Interval> posterior_interval;  // central
};

struct AnalysisReport {
  std::size_t k = 0;
  AnalysisConfig config;
  std::vector<MethodBlock> results;
  TauBlock tau;
};

/// Applies the subset first, then runs every selected method. Engine errors
/// are rethrown with the method name prepended.
AnalysisReport run_analysis(const Dataset& d, const AnalysisConfig& cfg);

struct SensitivityEntry {
  std::string tau_prior_spec;
  std::optional<AnalysisReport> report;
  std::string error;  // set when the spec did not parse or the run failed
};

/// One run per tau prior spec; a failing spec does not stop the others.
std::vector<SensitivityEntry> run_sensitivity(const Dataset& d, const AnalysisConfig& base_cfg,
                                              const std::vector<std::string>& tau_prior_specs);

/// Model built from the config's prior specs on the (subsetted) data.
Model make_model(const Dataset& d, const AnalysisConfig& cfg);
Dataset apply_subset(const Dataset& d, const AnalysisConfig& cfg);

}  // namespace metamix::io
