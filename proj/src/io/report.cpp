#include "metamix/io/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "metamix/io/prior_text.hpp"

namespace metamix::io {

using nlohmann::ordered_json;

double round_significant(double v, int digits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

namespace {

ordered_json num(double v) { return round_significant(v); }

ordered_json interval_json(const Interval& i) { return ordered_json::array({num(i.lo), num(i.hi)}); }

template <class T, class Fn>
ordered_json optional_json(const std::optional<T>& v, Fn&& fn) {
  return v ? fn(*v) : ordered_json(nullptr);
}

ordered_json config_json(const AnalysisConfig& c) {
  ordered_json j;
  j["tau_prior"] = format_tau_prior(parse_tau_prior(c.tau_prior_spec));
  j["effect_prior"] = format_effect_prior(parse_effect_prior(c.effect_prior_spec));
  j["level"] = num(c.level);
  j["interval_kind"] = to_string(c.interval_kind);
  ordered_json methods = ordered_json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["subset"] = c.subset_last ? ordered_json("last:" + std::to_string(*c.subset_last))
                              : ordered_json(nullptr);
  if (c.has(Method::hksj)) {
    j["hksj_tau_method"] = to_string(c.hksj_tau_method);
    j["hksj_modified"] = c.hksj_modified;
  }
  return j;
}

std::string fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string method_label(const MethodBlock& b) {
  std::string label(to_string(b.method));
  if (b.method == Method::hksj && b.tau_method) label += "(" + std::string(to_string(*b.tau_method)) + ")";
  return label;
}

}  // namespace

ordered_json report_to_json(const AnalysisReport& r) {
  ordered_json j;
  j["k"] = r.k;
  j["config"] = config_json(r.config);

  ordered_json results = ordered_json::array();
  for (const auto& b : r.results) {
    ordered_json m;
    m["method"] = to_string(b.method);
    m["estimate"] = num(b.estimate);
    m["se_or_sd"] = num(b.se_or_sd);
    m["interval"] = interval_json(b.interval);
    m["level"] = num(b.level);
    if (b.posterior_mean) m["posterior_mean"] = num(*b.posterior_mean);
    if (b.interval_kind) m["interval_kind"] = to_string(*b.interval_kind);
    if (b.tau_hat) m["tau_hat"] = num(*b.tau_hat);
    if (b.tau_method) m["tau_method"] = to_string(*b.tau_method);
    if (b.method == Method::hksj) m["degenerate"] = b.degenerate;
    results.push_back(std::move(m));
  }
  j["results"] = std::move(results);

  ordered_json tau;
  tau["estimate"] = optional_json(r.tau.estimate, [](double v) { return num(v); });
  tau["estimate_method"] = optional_json(r.tau.estimate_method,
                                         [](TauMethod m) { return ordered_json(to_string(m)); });
  tau["interval"] = optional_json(r.tau.interval, interval_json);
  if (r.tau.posterior_median) tau["posterior_median"] = num(*r.tau.posterior_median);
  if (r.tau.posterior_interval) tau["posterior_interval"] = interval_json(*r.tau.posterior_interval);
  j["tau"] = std::move(tau);

  j["provenance"] = {{"input", r.config.input_path}};
  return j;
}

std::string emit_report(const AnalysisReport& r, OutputFormat format) {
  if (format == OutputFormat::json) return report_to_json(r).dump(2) + "\n";

  std::ostringstream out;
  const auto& c = r.config;
  out << "k = " << r.k << "    tau prior: " << format_tau_prior(parse_tau_prior(c.tau_prior_spec))
      << "    effect prior: " << format_effect_prior(parse_effect_prior(c.effect_prior_spec));
  if (c.subset_last) out << "    subset: last " << *c.subset_last;
  out << "\n\n";

  const std::string level_label = fixed(100.0 * c.level, 1) + "% interval";
  out << "method        estimate     se/sd        " << level_label << "\n";
  for (const auto& b : r.results) {
    std::string label = method_label(b);
    label.resize(std::max<std::size_t>(label.size(), 10), ' ');
    out << label << pad(fixed(b.estimate), 12) << pad(fixed(b.se_or_sd), 10) << "    ["
        << fixed(b.interval.lo) << ", " << fixed(b.interval.hi) << "]";
    if (b.interval_kind) out << "  " << to_string(*b.interval_kind);
    if (b.degenerate) out << "  degenerate";
    out << "\n";
  }

  out << "\ntau:";
  if (r.tau.estimate) {
    out << " estimate " << fixed(*r.tau.estimate) << " (" << to_string(*r.tau.estimate_method)
        << ")";
  }
  if (r.tau.interval) {
    out << "  Q-profile [" << fixed(r.tau.interval->lo) << ", " << fixed(r.tau.interval->hi)
        << "]";
  }
  if (r.tau.posterior_median) {
    out << "  posterior median " << fixed(*r.tau.posterior_median) << " ["
        << fixed(r.tau.posterior_interval->lo) << ", " << fixed(r.tau.posterior_interval->hi)
        << "]";
  }
  out << "\n";
  return out.str();
}

std::string emit_sensitivity(const std::vector<SensitivityEntry>& entries, OutputFormat format) {
  if (format == OutputFormat::json) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : entries) {
      if (e.report) {
        arr.push_back(report_to_json(*e.report));
      } else {
        arr.push_back({{"tau_prior", e.tau_prior_spec}, {"error", e.error}});
      }
    }
    return ordered_json{{"sensitivity", std::move(arr)}}.dump(2) + "\n";
  }
  std::string out;
  for (const auto& e : entries) {
    out += "== tau prior " + e.tau_prior_spec + "\n";
    out += e.report ? emit_report(*e.report, format) : "error: " + e.error + "\n";
    out += "\n";
  }
  return out;
}

}  // namespace metamix::io
