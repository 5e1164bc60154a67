#include "metamix/data.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "metamix/error.hpp"

namespace metamix {

Dataset::Dataset(std::vector<Study> studies) : studies_(std::move(studies)) {
  if (studies_.empty()) throw DataError("dataset must contain at least one study");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < studies_.size(); ++i) {
    const Study& s = studies_[i];
    if (!std::isfinite(s.y)) {
      throw DataError("study " + std::to_string(i + 1) + " ('" + s.label +
                      "'): effect estimate is not finite");
    }
    if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) {
      throw DataError("study " + std::to_string(i + 1) + " ('" + s.label +
                      "'): standard error must be positive and finite");
    }
    if (!seen.insert(s.label).second) {
      throw DataError("duplicate study label '" + s.label + "'");
    }
  }
}

Dataset Dataset::from_arrays(std::span<const double> y, std::span<const double> sigma) {
  if (y.size() != sigma.size()) throw DataError("y and sigma differ in length");
  std::vector<Study> studies;
  studies.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    studies.push_back({std::to_string(i + 1), y[i], sigma[i]});
  }
  return Dataset(std::move(studies));
}

double Dataset::max_sigma() const noexcept {
  double m = 0.0;
  for (const auto& s : studies_) m = std::max(m, s.sigma);
  return m;
}

double Dataset::y_range() const noexcept {
  const auto [lo, hi] = std::minmax_element(
      studies_.begin(), studies_.end(), [](const Study& a, const Study& b) { return a.y < b.y; });
  return hi->y - lo->y;
}

bool needs_continuity_correction(const CountTable& t) noexcept {
  const auto a = t.events_t;
  const auto b = t.n_t - t.events_t;
  const auto c = t.events_c;
  const auto d = t.n_c - t.events_c;
  return std::min({a, b, c, d}) == 0;
}

EffectEstimate log_or_from_counts(const CountTable& t) {
  if (t.n_t < 1 || t.n_c < 1) throw DataError("count table: arm sizes must be at least 1");
  if (t.events_t < 0 || t.events_c < 0) throw DataError("count table: negative event count");
  if (t.events_t > t.n_t || t.events_c > t.n_c) {
    throw DataError("count table: more events than participants");
  }
  if (t.events_t == 0 && t.events_c == 0) {
    throw DataError("count table: no events in either arm (double-zero study)");
  }
  if (t.events_t == t.n_t && t.events_c == t.n_c) {
    throw DataError("count table: all participants had events in both arms");
  }
  double a = static_cast<double>(t.events_t);
  double b = static_cast<double>(t.n_t - t.events_t);
  double c = static_cast<double>(t.events_c);
  double d = static_cast<double>(t.n_c - t.events_c);
  if (needs_continuity_correction(t)) {
    a += 0.5;
    b += 0.5;
    c += 0.5;
    d += 0.5;
  }
  return {std::log(a * d / (b * c)), std::sqrt(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d)};
}

Dataset subset_last(const Dataset& d, std::size_t n) {
  if (n < 1 || n > d.size()) {
    throw DataError("subset: requested last " + std::to_string(n) + " of " +
                    std::to_string(d.size()) + " studies");
  }
  return Dataset(std::vector<Study>(d.studies().end() - static_cast<std::ptrdiff_t>(n),
                                    d.studies().end()));
}

}  // namespace metamix
