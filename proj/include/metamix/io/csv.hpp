#pragma once

#include <filesystem>
#include <string_view>

#include "metamix/data.hpp"

namespace metamix::io {

/// Reads either `study,y,se` or `study,events_t,n_t,events_c,n_c` rows.
/// Count rows are converted to log odds ratios. Errors (DataError) name the
/// offending line.
Dataset parse_csv(const std::filesystem::path& path);
Dataset parse_csv_text(std::string_view text);

}  // namespace metamix::io
