// meta: command-line front end.
//
//   meta analyze <csv> [--tau-prior half-normal:0.5] [--mu-prior uniform]
//                      [--level 0.95] [--interval shortest|central]
//                      [--methods bayes,dl,...] [--subset last:3]
//                      [--plot fig.svg] [--format json|text] [--output path]
//   meta sensitivity <csv> --tau-prior A --tau-prior B [...same options]
//   meta prior --tau-prior <spec> [--quantile q ...]
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metamix/error.hpp"
#include "metamix/io/analysis.hpp"
#include "metamix/io/csv.hpp"
#include "metamix/io/prior_text.hpp"
#include "metamix/io/report.hpp"
#include "metamix/io/svg_plot.hpp"

namespace {

using namespace metamix;

constexpr int kExitUsage = 1;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return 1;
    case ErrorKind::data: return 2;
    case ErrorKind::numerical: return 3;
  }
  return 1;
}

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
  }
  return "usage";
}

// One line on stderr: "meta: error[<kind>]: <message>".
int report_error(ErrorKind kind, std::string message) {
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "meta: error[" << kind_name(kind) << "]: " << message << "\n";
  return exit_code(kind);
}

struct CommonOptions {
  std::string csv;
  std::string mu_prior = "uniform";
  double level = 0.95;
  std::string interval = "shortest";
  std::string methods = "bayes,reml";
  std::string subset;
  std::string plot;
  std::string format = "json";
  std::string output;
  std::string hksj_tau = "reml";
  bool hksj_modified = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("csv", o.csv, "Input CSV (study,y,se or study,events_t,n_t,events_c,n_c)")
      ->required();
  cmd->add_option("--mu-prior", o.mu_prior, "Effect prior: uniform | normal:<mean>,<sd>");
  cmd->add_option("--level", o.level, "Interval level");
  cmd->add_option("--interval", o.interval, "Bayesian interval kind: shortest | central");
  cmd->add_option("--methods", o.methods, "Comma-separated: bayes,common,dl,reml,hksj");
  cmd->add_option("--subset", o.subset, "Analyse only the most recent studies: last:<n>");
  cmd->add_option("--plot", o.plot, "Write a density comparison SVG");
  cmd->add_option("--format", o.format, "Output format: json | text");
  cmd->add_option("--output,-o", o.output, "Write the report here instead of stdout");
  cmd->add_option("--hksj-tau", o.hksj_tau, "Heterogeneity estimator for hksj: dl | reml");
  cmd->add_flag("--hksj-modified", o.hksj_modified, "Floor the HKSJ variance factor at 1");
}

io::AnalysisConfig make_config(const CommonOptions& o, const std::string& tau_prior) {
  io::AnalysisConfig cfg;
  cfg.tau_prior_spec = tau_prior;
  cfg.effect_prior_spec = o.mu_prior;
  cfg.level = o.level;
  cfg.interval_kind = io::parse_interval_kind(o.interval);
  cfg.methods = io::parse_methods(o.methods);
  if (!o.subset.empty()) cfg.subset_last = io::parse_subset(o.subset);
  if (!o.plot.empty()) cfg.plot_path = o.plot;
  if (o.format == "json") {
    cfg.output_format = io::OutputFormat::json;
  } else if (o.format == "text") {
    cfg.output_format = io::OutputFormat::text;
  } else {
    throw DomainError("format must be 'json' or 'text', got '" + o.format + "'");
  }
  if (o.hksj_tau == "dl") {
    cfg.hksj_tau_method = TauMethod::dl;
  } else if (o.hksj_tau == "reml") {
    cfg.hksj_tau_method = TauMethod::reml;
  } else {
    throw DomainError("--hksj-tau must be 'dl' or 'reml'");
  }
  cfg.hksj_modified = o.hksj_modified;
  cfg.input_path = o.csv;
  cfg.validate();
  return cfg;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw DataError("cannot write '" + path + "'");
}

int run_analyze(const CommonOptions& o, const std::string& tau_prior) {
  const auto cfg = make_config(o, tau_prior);
  const auto data = io::parse_csv(o.csv);
  const auto report = io::run_analysis(data, cfg);
  if (cfg.plot_path) io::plot_density_comparison(data, cfg, *cfg.plot_path);
  write_output(io::emit_report(report, cfg.output_format), o.output);
  return 0;
}

int run_sensitivity(const CommonOptions& o, const std::vector<std::string>& tau_priors) {
  const auto cfg = make_config(o, "fixed:0");
  const auto data = io::parse_csv(o.csv);
  const auto entries = io::run_sensitivity(data, cfg, tau_priors);
  write_output(io::emit_sensitivity(entries, cfg.output_format), o.output);
  for (const auto& e : entries) {
    if (!e.report) {
      return report_error(ErrorKind::usage, "tau prior '" + e.tau_prior_spec + "': " + e.error);
    }
  }
  return 0;
}

int run_prior(const std::string& tau_prior, const std::vector<double>& quantiles) {
  const auto prior = io::parse_tau_prior(tau_prior);
  nlohmann::ordered_json j;
  j["tau_prior"] = io::format_tau_prior(prior);
  nlohmann::ordered_json qs = nlohmann::ordered_json::array();
  for (double q : quantiles) {
    qs.push_back({{"p", q}, {"tau", io::round_significant(tau_prior_quantile(prior, q))}});
  }
  j["quantiles"] = std::move(qs);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian and frequentist random-effects meta-analysis"};
  app.require_subcommand(1);

  CommonOptions analyze_opts;
  std::string tau_prior = "half-normal:0.5";
  auto* analyze = app.add_subcommand("analyze", "Run one analysis");
  add_common(analyze, analyze_opts);
  analyze->add_option("--tau-prior", tau_prior, "Heterogeneity prior, e.g. half-normal:0.5");

  CommonOptions sens_opts;
  std::vector<std::string> sens_priors;
  auto* sensitivity = app.add_subcommand("sensitivity", "Repeat an analysis over tau priors");
  add_common(sensitivity, sens_opts);
  sensitivity->add_option("--tau-prior", sens_priors, "Heterogeneity prior (repeatable)")
      ->required();

  std::string prior_spec;
  std::vector<double> quantiles{0.5, 0.95};
  auto* prior = app.add_subcommand("prior", "Quantiles of a heterogeneity prior");
  prior->add_option("--tau-prior", prior_spec, "Heterogeneity prior")->required();
  prior->add_option("--quantile,-q", quantiles, "Probabilities (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorKind::usage, e.what());
  }

  try {
    if (*analyze) return run_analyze(analyze_opts, tau_prior);
    if (*sensitivity) return run_sensitivity(sens_opts, sens_priors);
    if (*prior) return run_prior(prior_spec, quantiles);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    return report_error(ErrorKind::numerical, e.what());
  }
  return kExitUsage;
}
