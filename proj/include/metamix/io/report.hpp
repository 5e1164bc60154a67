#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "metamix/io/analysis.hpp"

namespace metamix::io {

/// Value rounded to 6 significant digits, as written to reports.
double round_significant(double v, int digits = 6);

/// Report as JSON with a fixed key order:
/// k, config, results[], tau, provenance.
nlohmann::ordered_json report_to_json(const AnalysisReport& r);

/// JSON (2-space indent, trailing newline) or an aligned text table.
std::string emit_report(const AnalysisReport& r, OutputFormat format);

std::string emit_sensitivity(const std::vector<SensitivityEntry>& entries, OutputFormat format);

}  // namespace metamix::io
