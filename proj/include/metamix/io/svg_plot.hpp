#pragma once

// Side-by-side density plot of the exact mixture posterior of the effect,
// its moment-matched normal (dashed) and the frequentist normal
// approximation, with point estimates and intervals drawn underneath.
//
// Output is a standalone SVG 1.1 document with a fixed 800x500 viewBox.
// Curve vertices are written with ten decimals, and a <metadata> element
// records the data-to-pixel mapping so the plotted densities can be read
// back exactly.

#include <filesystem>
#include <string>
#include <vector>

#include "metamix/io/analysis.hpp"

namespace metamix::io {

struct PlotGeometry {
  double width = 800.0;
  double height = 500.0;
  double left = 70.0;
  double right = 770.0;
  double top = 30.0;
  double bottom = 360.0;  // baseline of the density panel
  double x_min = 0.0;
  double x_max = 1.0;
  double y_max = 1.0;
  int samples = 401;

  double px(double x) const { return left + (x - x_min) / (x_max - x_min) * (right - left); }
  double py(double density) const { return bottom - density / y_max * (bottom - top); }
  double x_at(double pixel_x) const {
    return x_min + (pixel_x - left) / (right - left) * (x_max - x_min);
  }
  double density_at(double pixel_y) const { return (bottom - pixel_y) / (bottom - top) * y_max; }
};

struct DensityPlot {
  PlotGeometry geometry;
  std::vector<double> x;
  std::vector<double> posterior;       // exact mixture
  std::vector<double> moment_matched;  // normal with the mixture's mean and sd
  std::vector<double> frequentist;     // normal approximation N(mu_hat, se^2)
  MethodBlock bayes;
  MethodBlock freq;
};

/// Evaluates all curves and intervals. Requires bayes among cfg.methods.
/// The frequentist curve uses the first selected of reml, dl, common
/// (falling back to reml, or common when k = 1).
DensityPlot compute_density_plot(const Dataset& d, const AnalysisConfig& cfg);

std::string render_svg(const DensityPlot& plot);

/// Writes the SVG; throws DataError when the path is not writable.
void plot_density_comparison(const Dataset& d, const AnalysisConfig& cfg,
                             const std::filesystem::path& out_path);

}  // namespace metamix::io
