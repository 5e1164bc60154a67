#include "metamix/io/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "metamix/error.hpp"
#include "metamix/io/prior_text.hpp"

namespace metamix::io {

namespace {

constexpr const char* kPosteriorColor = "#1f4e9c";
constexpr const char* kFrequentistColor = "#c0392b";

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string coord(double v) { return fmt("%.10f", v); }

std::string label2(double v) { return fmt("%.2f", v); }

std::string estimate_label(const MethodBlock& b) {
  return label2(b.estimate) + " [" + label2(b.interval.lo) + ", " + label2(b.interval.hi) + "]";
}

std::string path_data(const PlotGeometry& g, const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  std::string d;
  d.reserve(xs.size() * 30);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d += i == 0 ? "M" : " L";
    d += coord(g.px(xs[i]));
    d += ',';
    d += coord(g.py(ys[i]));
  }
  return d;
}

// 1-2-5 tick spacing giving roughly n ticks over [lo, hi].
double tick_step(double lo, double hi, int n) {
  const double raw = (hi - lo) / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

MethodBlock pick_frequentist(const AnalysisReport& report) {
  for (Method m : {Method::reml, Method::dl, Method::common}) {
    for (const auto& b : report.results) {
      if (b.method == m) return b;
    }
  }
  throw DomainError("no frequentist normal-approximation method available");
}

}  // namespace

DensityPlot compute_density_plot(const Dataset& d, const AnalysisConfig& cfg) {
  if (!cfg.has(Method::bayes)) throw DomainError("plot requires the bayes method");

  AnalysisConfig run_cfg = cfg;
  const auto k = apply_subset(d, cfg).size();
  if (!cfg.has(Method::reml) && !cfg.has(Method::dl) && !cfg.has(Method::common)) {
    run_cfg.methods.push_back(k >= 2 ? Method::reml : Method::common);
  }
  const auto report = run_analysis(d, run_cfg);

  const Model model = make_model(d, cfg);
  const auto mixture = mu_marginal_mixture(model);
  const auto mm = moment_matched_normal(mixture);

  DensityPlot plot;
  plot.bayes = report.results.front();
  for (const auto& b : report.results) {
    if (b.method == Method::bayes) plot.bayes = b;
  }
  plot.freq = pick_frequentist(report);

  auto& g = plot.geometry;
  g.x_min = mm.mean - 4.0 * mm.sd;
  g.x_max = mm.mean + 4.0 * mm.sd;

  const int n = g.samples;
  plot.x.resize(n);
  plot.posterior.resize(n);
  plot.moment_matched.resize(n);
  plot.frequentist.resize(n);
  double y_max = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.x_min + (g.x_max - g.x_min) * i / (n - 1);
    plot.x[i] = x;
    plot.posterior[i] = mixture_density(mixture, x);
    plot.moment_matched[i] = normal_pdf((x - mm.mean) / mm.sd) / mm.sd;
    plot.frequentist[i] = normal_pdf((x - plot.freq.estimate) / plot.freq.se_or_sd) /
                          plot.freq.se_or_sd;
    y_max = std::max({y_max, plot.posterior[i], plot.moment_matched[i], plot.frequentist[i]});
  }
  g.y_max = 1.05 * y_max;
  return plot;
}

std::string render_svg(const DensityPlot& plot) {
  const auto& g = plot.geometry;
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"500\" "
       "viewBox=\"0 0 800 500\">\n";

  nlohmann::ordered_json meta;
  meta["x_min"] = g.x_min;
  meta["x_max"] = g.x_max;
  meta["y_max"] = g.y_max;
  meta["left"] = g.left;
  meta["right"] = g.right;
  meta["top"] = g.top;
  meta["bottom"] = g.bottom;
  meta["samples"] = g.samples;
  s += "  <metadata id=\"plot-geometry\">" + meta.dump() + "</metadata>\n";
  s += "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";

  // Axis with ticks.
  s += "  <g id=\"x-axis\" stroke=\"black\" stroke-width=\"1\" font-family=\"sans-serif\" "
       "font-size=\"12\">\n";
  s += "    <line x1=\"" + coord(g.left) + "\" y1=\"" + coord(g.bottom) + "\" x2=\"" +
       coord(g.right) + "\" y2=\"" + coord(g.bottom) + "\"/>\n";
  const double step = tick_step(g.x_min, g.x_max, 8);
  for (double t = std::ceil(g.x_min / step) * step; t <= g.x_max + 1e-12 * step; t += step) {
    const double tx = g.px(t);
    const double shown = std::abs(t) < 1e-9 * step ? 0.0 : t;
    s += "    <line x1=\"" + coord(tx) + "\" y1=\"" + coord(g.bottom) + "\" x2=\"" + coord(tx) +
         "\" y2=\"" + coord(g.bottom + 5.0) + "\"/>\n";
    s += "    <text x=\"" + coord(tx) + "\" y=\"" + coord(g.bottom + 18.0) +
         "\" stroke=\"none\" text-anchor=\"middle\">" + fmt("%g", shown) + "</text>\n";
  }
  s += "    <text x=\"" + coord(0.5 * (g.left + g.right)) + "\" y=\"" + coord(g.bottom + 36.0) +
       "\" stroke=\"none\" text-anchor=\"middle\">effect</text>\n";
  s += "  </g>\n";

  // Density curves.
  s += "  <path id=\"frequentist-density\" fill=\"none\" stroke=\"" +
       std::string(kFrequentistColor) + "\" stroke-width=\"2\" d=\"" +
       path_data(g, plot.x, plot.frequentist) + "\"/>\n";
  s += "  <path id=\"posterior-density\" fill=\"none\" stroke=\"" + std::string(kPosteriorColor) +
       "\" stroke-width=\"2\" d=\"" + path_data(g, plot.x, plot.posterior) + "\"/>\n";
  s += "  <path id=\"moment-matched-density\" fill=\"none\" stroke=\"" +
       std::string(kPosteriorColor) + "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\" d=\"" +
       path_data(g, plot.x, plot.moment_matched) + "\"/>\n";

  // Estimates and intervals below the axis.
  auto whisker = [&](const MethodBlock& b, double y, const char* color, const std::string& name) {
    const double lo = g.px(std::clamp(b.interval.lo, g.x_min, g.x_max));
    const double hi = g.px(std::clamp(b.interval.hi, g.x_min, g.x_max));
    const double est = g.px(std::clamp(b.estimate, g.x_min, g.x_max));
    std::string w = "  <g id=\"" + name + "-interval\" stroke=\"" + color + "\" fill=\"" + color +
                    "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    w += "    <line x1=\"" + coord(lo) + "\" y1=\"" + coord(y) + "\" x2=\"" + coord(hi) +
         "\" y2=\"" + coord(y) + "\" stroke-width=\"2\"/>\n";
    for (double e : {lo, hi}) {
      w += "    <line x1=\"" + coord(e) + "\" y1=\"" + coord(y - 5.0) + "\" x2=\"" + coord(e) +
           "\" y2=\"" + coord(y + 5.0) + "\" stroke-width=\"2\"/>\n";
    }
    w += "    <circle cx=\"" + coord(est) + "\" cy=\"" + coord(y) + "\" r=\"4\"/>\n";
    w += "    <text x=\"" + coord(g.right) + "\" y=\"" + coord(y + 4.0) +
         "\" stroke=\"none\" text-anchor=\"end\">" + name + ": " + estimate_label(b) +
         "</text>\n";
    w += "  </g>\n";
    return w;
  };
  s += whisker(plot.freq, g.bottom + 62.0, kFrequentistColor,
               std::string(to_string(plot.freq.method)));
  s += whisker(plot.bayes, g.bottom + 92.0, kPosteriorColor, "bayes");

  s += "</svg>\n";
  return s;
}

void plot_density_comparison(const Dataset& d, const AnalysisConfig& cfg,
                             const std::filesystem::path& out_path) {
  const auto svg = render_svg(compute_density_plot(d, cfg));
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write plot to '" + out_path.string() + "'");
  out << svg;
  if (!out) throw DataError("failed writing plot to '" + out_path.string() + "'");
}

}  // namespace metamix::io
