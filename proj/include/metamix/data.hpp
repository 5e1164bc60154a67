#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace metamix {

/// One study's effect estimate (e.g. a log odds ratio) and its standard error.
struct Study {
  std::string label;
  double y = 0.0;
  double sigma = 1.0;
};

/// Ordered collection of studies. Construction validates sigma > 0, finite
/// estimates, unique labels and k >= 1; violations throw DataError.
class Dataset {
 public:
  explicit Dataset(std::vector<Study> studies);

  /// Convenience constructor; labels become "1", "2", ...
  static Dataset from_arrays(std::span<const double> y, std::span<const double> sigma);

  std::size_t size() const noexcept { return studies_.size(); }
  const Study& operator[](std::size_t i) const { return studies_[i]; }
  const std::vector<Study>& studies() const noexcept { return studies_; }

  auto begin() const noexcept { return studies_.begin(); }
  auto end() const noexcept { return studies_.end(); }

  double max_sigma() const noexcept;
  /// max(y) - min(y)
  double y_range() const noexcept;

 private:
  std::vector<Study> studies_;
};

/// 2x2 table of event counts in the treatment and control arms.
struct CountTable {
  std::int64_t events_t = 0;
  std::int64_t n_t = 0;
  std::int64_t events_c = 0;
  std::int64_t n_c = 0;
};

struct EffectEstimate {
  double y = 0.0;
  double sigma = 0.0;
};

/// Woolf log odds ratio and standard error. If any cell is zero, 0.5 is added
/// to all four cells. Tables without events in either arm (or without
/// non-events in either arm) are rejected with DataError.
EffectEstimate log_or_from_counts(const CountTable& t);

/// True iff log_or_from_counts applies the 0.5 continuity correction.
bool needs_continuity_correction(const CountTable& t) noexcept;

/// The last n studies, in original order. The dataset is assumed to be in
/// chronological order, so this selects the n most recent studies.
Dataset subset_last(const Dataset& d, std::size_t n);

}  // namespace metamix
