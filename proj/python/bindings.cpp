#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "metamix/bayes.hpp"
#include "metamix/error.hpp"
#include "metamix/freq.hpp"
#include "metamix/io/analysis.hpp"
#include "metamix/io/csv.hpp"
#include "metamix/io/prior_text.hpp"
#include "metamix/io/report.hpp"
#include "metamix/priors.hpp"

namespace py = pybind11;
using namespace metamix;

namespace {

Dataset make_dataset(const std::vector<double>& y, const std::vector<double>& se,
                     const std::vector<std::string>& labels) {
  if (y.size() != se.size()) throw DataError("y and se differ in length");
  if (!labels.empty() && labels.size() != y.size()) throw DataError("labels and y differ in length");
  if (labels.empty()) return Dataset::from_arrays(y, se);
  std::vector<Study> rows;
  for (std::size_t i = 0; i < y.size(); ++i) rows.push_back({labels[i], y[i], se[i]});
  return Dataset(rows);
}

TauMethod parse_tau_method(const std::string& name) {
  if (name == "dl") return TauMethod::dl;
  if (name == "reml") return TauMethod::reml;
  throw DomainError("unknown tau method '" + name + "' (expected dl or reml)");
}

py::dict result_dict(const FrequentistResult& r) {
  py::dict out;
  out["method"] = std::string(to_string(r.method));
  out["estimate"] = r.mu_hat;
  out["se"] = r.se_mu;
  out["interval"] = py::make_tuple(r.interval.lo, r.interval.hi);
  out["level"] = r.level;
  out["tau_hat"] = r.tau_hat;
  out["degenerate"] = r.degenerate;
  return out;
}

py::dict summary_dict(const PosteriorSummary& s) {
  py::dict out;
  out["mean"] = s.mean;
  out["sd"] = s.sd;
  out["median"] = s.median;
  out["interval"] = py::make_tuple(s.interval.lo, s.interval.hi);
  out["level"] = s.level;
  out["interval_kind"] = std::string(io::to_string(s.interval_kind));
  return out;
}

io::AnalysisConfig make_config(const std::string& tau_prior, const std::string& methods, double level,
                               const std::string& interval, std::optional<std::size_t> subset_last) {
  io::AnalysisConfig cfg;
  cfg.tau_prior_spec = tau_prior;
  cfg.methods = io::parse_methods(methods);
  cfg.level = level;
  cfg.interval_kind = io::parse_interval_kind(interval);
  cfg.subset_last = subset_last;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_metamix, m) {
  m.doc() = "Exact-mixture Bayesian and frequentist random-effects meta-analysis";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("y"), py::arg("se"),
           py::arg("labels") = std::vector<std::string>{})
      .def("__len__", &Dataset::size)
      .def_property_readonly("y", [](const Dataset& d) {
        std::vector<double> v;
        for (const auto& s : d) v.push_back(s.y);
        return v;
      })
      .def_property_readonly("se", [](const Dataset& d) {
        std::vector<double> v;
        for (const auto& s : d) v.push_back(s.sigma);
        return v;
      })
      .def_property_readonly("labels", [](const Dataset& d) {
        std::vector<std::string> v;
        for (const auto& s : d) v.push_back(s.label);
        return v;
      });

  m.def("read_csv", [](const std::string& path) { return io::parse_csv(path); }, py::arg("path"));
  m.def("subset_last", &subset_last, py::arg("data"), py::arg("n"));

  py::class_<NormalMixture>(m, "NormalMixture")
      .def(py::init([](const std::vector<std::tuple<double, double, double>>& comps) {
             std::vector<NormalComponent> cs;
             for (const auto& [w, mu, sd] : comps) cs.push_back({w, mu, sd});
             return NormalMixture(cs);
           }),
           py::arg("components"))
      .def_property_readonly("components", [](const NormalMixture& mix) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& c : mix.components()) out.emplace_back(c.weight, c.mean, c.sd);
        return out;
      })
      .def("__len__", &NormalMixture::size)
      .def("pdf", [](const NormalMixture& mix, double x) { return mixture_density(mix, x); }, py::arg("x"))
      .def("cdf", [](const NormalMixture& mix, double x) { return mixture_cdf(mix, x); }, py::arg("x"))
      .def("quantile", [](const NormalMixture& mix, double p) { return mixture_quantile(mix, p); },
           py::arg("p"))
      .def("interval",
           [](const NormalMixture& mix, double level, const std::string& kind) {
             const auto iv = credible_interval(mix, level, io::parse_interval_kind(kind));
             return py::make_tuple(iv.lo, iv.hi);
           },
           py::arg("level") = 0.95, py::arg("kind") = "shortest")
      .def("moments", [](const NormalMixture& mix) {
        const auto mm = moment_matched_normal(mix);
        return py::make_tuple(mm.mean, mm.sd);
      });

  m.def("effect_posterior",
        [](const Dataset& d, const std::string& tau_prior) {
          return mu_marginal_mixture(Model{d, io::parse_tau_prior(tau_prior)});
        },
        py::arg("data"), py::arg("tau_prior") = "half-normal:0.5");
  m.def("predictive",
        [](const Dataset& d, const std::string& tau_prior) {
          return predictive_mixture(Model{d, io::parse_tau_prior(tau_prior)});
        },
        py::arg("data"), py::arg("tau_prior") = "half-normal:0.5");
  m.def("shrinkage",
        [](const Dataset& d, std::size_t study, const std::string& tau_prior) {
          return shrinkage_mixture(Model{d, io::parse_tau_prior(tau_prior)}, study);
        },
        py::arg("data"), py::arg("study"), py::arg("tau_prior") = "half-normal:0.5");
  m.def("tau_posterior",
        [](const Dataset& d, const std::string& tau_prior, double level) {
          return summary_dict(tau_posterior_summary(build_tau_posterior(Model{d, io::parse_tau_prior(tau_prior)}), level));
        },
        py::arg("data"), py::arg("tau_prior") = "half-normal:0.5", py::arg("level") = 0.95);

  m.def("tau_prior_quantile",
        [](const std::string& spec, double q) { return tau_prior_quantile(io::parse_tau_prior(spec), q); },
        py::arg("spec"), py::arg("q"));
  m.def("format_tau_prior", [](const std::string& spec) { return io::format_tau_prior(io::parse_tau_prior(spec)); },
        py::arg("spec"));

  m.def("common_effect", [](const Dataset& d, double level) { return result_dict(common_effect(d, level)); },
        py::arg("data"), py::arg("level") = 0.95);
  m.def("random_effects",
        [](const Dataset& d, const std::string& tau_method, double level) {
          return result_dict(random_effects_normal(d, parse_tau_method(tau_method), level));
        },
        py::arg("data"), py::arg("tau_method") = "reml", py::arg("level") = 0.95);
  m.def("hksj",
        [](const Dataset& d, const std::string& tau_method, double level, bool modified) {
          return result_dict(hksj_interval(d, parse_tau_method(tau_method), level, modified));
        },
        py::arg("data"), py::arg("tau_method") = "reml", py::arg("level") = 0.95, py::arg("modified") = false);
  m.def("tau_estimate", [](const Dataset& d, const std::string& method) { return estimate_tau(d, parse_tau_method(method)); },
        py::arg("data"), py::arg("method") = "reml");
  m.def("q_statistic", &q_statistic, py::arg("data"), py::arg("tau") = 0.0);
  m.def("q_profile",
        [](const Dataset& d, double level) {
          const auto iv = q_profile_interval(d, level);
          return py::make_tuple(iv.lo, iv.hi);
        },
        py::arg("data"), py::arg("level") = 0.95);

  m.def("analyze_json",
        [](const Dataset& d, const std::string& tau_prior, const std::string& methods, double level,
           const std::string& interval, std::optional<std::size_t> subset_last) {
          const auto cfg = make_config(tau_prior, methods, level, interval, subset_last);
          return io::emit_report(io::run_analysis(d, cfg), io::OutputFormat::json);
        },
        py::arg("data"), py::arg("tau_prior") = "half-normal:0.5", py::arg("methods") = "bayes,reml",
        py::arg("level") = 0.95, py::arg("interval") = "shortest", py::arg("subset_last") = py::none());
}
