#include "metamix/io/analysis.hpp"

#include <algorithm>

#include "metamix/error.hpp"
#include "metamix/io/prior_text.hpp"

namespace metamix::io {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::bayes: return "bayes";
    case Method::common: return "common";
    case Method::dl: return "dl";
    case Method::reml: return "reml";
    case Method::hksj: return "hksj";
  }
  return "?";
}

std::string_view to_string(IntervalKind k) noexcept {
  return k == IntervalKind::shortest ? "shortest" : "central";
}

std::vector<Method> parse_methods(std::string_view text) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto name = text.substr(start, comma == text.npos ? text.npos : comma - start);
    start = comma == text.npos ? text.size() + 1 : comma + 1;
    Method m;
    if (name == "bayes") {
      m = Method::bayes;
    } else if (name == "common") {
      m = Method::common;
    } else if (name == "dl") {
      m = Method::dl;
    } else if (name == "reml") {
      m = Method::reml;
    } else if (name == "hksj") {
      m = Method::hksj;
    } else {
      throw DomainError("unknown method '" + std::string(name) +
                        "' (expected bayes, common, dl, reml, hksj)");
    }
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

IntervalKind parse_interval_kind(std::string_view text) {
  if (text == "shortest") return IntervalKind::shortest;
  if (text == "central") return IntervalKind::central;
  throw DomainError("interval kind must be 'shortest' or 'central', got '" + std::string(text) +
                    "'");
}

std::size_t parse_subset(std::string_view text) {
  constexpr std::string_view prefix = "last:";
  if (text.substr(0, prefix.size()) != prefix) {
    throw DomainError("subset must look like 'last:<n>', got '" + std::string(text) + "'");
  }
  const double n = parse_number(text.substr(prefix.size()), text);
  if (!(n >= 1.0) || n != static_cast<double>(static_cast<std::size_t>(n))) {
    throw DomainError("subset count must be a positive integer, got '" + std::string(text) + "'");
  }
  return static_cast<std::size_t>(n);
}

void AnalysisConfig::validate() const {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
  if (methods.empty()) throw DomainError("no methods selected");
  parse_tau_prior(tau_prior_spec);
  parse_effect_prior(effect_prior_spec);
  if (subset_last && *subset_last == 0) throw DomainError("subset count must be positive");
}

bool AnalysisConfig::has(Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

Dataset apply_subset(const Dataset& d, const AnalysisConfig& cfg) {
  return cfg.subset_last ? subset_last(d, *cfg.subset_last) : d;
}

Model make_model(const Dataset& d, const AnalysisConfig& cfg) {
  return Model{apply_subset(d, cfg), parse_tau_prior(cfg.tau_prior_spec),
               parse_effect_prior(cfg.effect_prior_spec)};
}

namespace {

MethodBlock frequentist_block(Method m, const FrequentistResult& r) {
  MethodBlock b;
  b.method = m;
  b.estimate = r.mu_hat;
  b.se_or_sd = r.se_mu;
  b.interval = r.interval;
  b.level = r.level;
  b.degenerate = r.degenerate;
  if (m != Method::common) b.tau_hat = r.tau_hat;
  return b;
}

template <class Fn>
auto with_context(Method m, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    // Keep the concrete type so callers can still catch DataError etc.
    const std::string msg = std::string(to_string(m)) + ": " + e.what();
    switch (e.kind()) {
      case ErrorKind::usage: throw DomainError(msg);
      case ErrorKind::data: throw DataError(msg);
      case ErrorKind::numerical: throw NumericalError(msg);
    }
    throw;
  }
}

}  // namespace

AnalysisReport run_analysis(const Dataset& d, const AnalysisConfig& cfg) {
  cfg.validate();
  const Model model = make_model(d, cfg);
  const Dataset& data = model.data;

  AnalysisReport report;
  report.k = data.size();
  report.config = cfg;

  for (Method m : cfg.methods) {
    switch (m) {
      case Method::bayes: {
        with_context(m, [&] {
          const auto tp = build_tau_posterior(model);
          const auto mixture = mu_marginal_mixture(tp);
          const auto s = mixture_summary(mixture, cfg.level, cfg.interval_kind);
          MethodBlock b;
          b.method = m;
          b.estimate = s.median;
          b.se_or_sd = s.sd;
          b.interval = s.interval;
          b.level = cfg.level;
          b.posterior_mean = s.mean;
          b.interval_kind = cfg.interval_kind;
          report.results.push_back(b);

          const auto ts = tau_posterior_summary(tp, cfg.level);
          report.tau.posterior_median = ts.median;
          report.tau.posterior_interval = ts.interval;
          return 0;
        });
        break;
      }
      case Method::common:
        report.results.push_back(
            frequentist_block(m, with_context(m, [&] { return common_effect(data, cfg.level); })));
        break;
      case Method::dl:
      case Method::reml: {
        const auto tm = m == Method::dl ? TauMethod::dl : TauMethod::reml;
        auto b = frequentist_block(
            m, with_context(m, [&] { return random_effects_normal(data, tm, cfg.level); }));
        b.tau_method = tm;
        report.results.push_back(b);
        break;
      }
      case Method::hksj: {
        auto b = frequentist_block(m, with_context(m, [&] {
                                     return hksj_interval(data, cfg.hksj_tau_method, cfg.level,
                                                          cfg.hksj_modified);
                                   }));
        b.tau_method = cfg.hksj_tau_method;
        report.results.push_back(b);
        break;
      }
    }
  }

  // Frequentist heterogeneity: the first selected random-effects estimator,
  // REML when none is selected.
  if (data.size() >= 2) {
    TauMethod tm = TauMethod::reml;
    for (const auto& b : report.results) {
      if (b.tau_method) {
        tm = *b.tau_method;
        break;
      }
    }
    report.tau.estimate = with_context(tm == TauMethod::dl ? Method::dl : Method::reml,
                                       [&] { return estimate_tau(data, tm); });
    report.tau.estimate_method = tm;
    report.tau.interval = q_profile_interval(data, cfg.level);
  }
  return report;
}

std::vector<SensitivityEntry> run_sensitivity(const Dataset& d, const AnalysisConfig& base_cfg,
                                              const std::vector<std::string>& tau_prior_specs) {
  std::vector<SensitivityEntry> out;
  out.reserve(tau_prior_specs.size());
  for (const auto& spec : tau_prior_specs) {
    SensitivityEntry entry;
    entry.tau_prior_spec = spec;
    AnalysisConfig cfg = base_cfg;
    cfg.tau_prior_spec = spec;
    try {
      entry.report = run_analysis(d, cfg);
    } catch (const Error& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace metamix::io
