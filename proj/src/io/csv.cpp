#include "metamix/io/csv.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metamix/error.hpp"

namespace metamix::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw DataError("line " + std::to_string(line) + ": " + msg);
}

double to_real(std::string_view field, std::size_t line, std::string_view column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    fail(line, "non-numeric value '" + std::string(field) + "' in column '" +
                   std::string(column) + "'");
  }
  return v;
}

std::int64_t to_count(std::string_view field, std::size_t line, std::string_view column) {
  std::int64_t v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || v < 0) {
    fail(line, "column '" + std::string(column) + "' needs a nonnegative integer, got '" +
                   std::string(field) + "'");
  }
  return v;
}

enum class Layout { estimates, counts };

}  // namespace

Dataset parse_csv_text(std::string_view text) {
  std::vector<Study> studies;
  std::optional<Layout> layout;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);

    if (!layout) {
      if (fields.size() == 3 && fields[0] == "study" && fields[1] == "y" && fields[2] == "se") {
        layout = Layout::estimates;
      } else if (fields.size() == 5 && fields[0] == "study" && fields[1] == "events_t" &&
                 fields[2] == "n_t" && fields[3] == "events_c" && fields[4] == "n_c") {
        layout = Layout::counts;
      } else {
        fail(line_no, "malformed header '" + std::string(line) +
                          "'; expected 'study,y,se' or 'study,events_t,n_t,events_c,n_c'");
      }
      continue;
    }

    const std::size_t expected = *layout == Layout::estimates ? 3 : 5;
    if (fields.size() != expected) {
      fail(line_no, "expected " + std::to_string(expected) + " fields, got " +
                        std::to_string(fields.size()));
    }
    Study s;
    s.label = std::string(fields[0]);
    if (s.label.empty()) fail(line_no, "empty study label");
    if (*layout == Layout::estimates) {
      s.y = to_real(fields[1], line_no, "y");
      s.sigma = to_real(fields[2], line_no, "se");
      if (!(s.sigma > 0.0)) fail(line_no, "non-positive se " + std::string(fields[2]));
    } else {
      const CountTable t{to_count(fields[1], line_no, "events_t"),
                         to_count(fields[2], line_no, "n_t"),
                         to_count(fields[3], line_no, "events_c"),
                         to_count(fields[4], line_no, "n_c")};
      try {
        const auto est = log_or_from_counts(t);
        s.y = est.y;
        s.sigma = est.sigma;
      } catch (const DataError& e) {
        fail(line_no, e.what());
      }
    }
    for (const auto& prev : studies) {
      if (prev.label == s.label) fail(line_no, "duplicate study label '" + s.label + "'");
    }
    studies.push_back(std::move(s));
  }
  if (!layout) throw DataError("line 1: missing header");
  if (studies.empty()) throw DataError("no data rows");
  return Dataset(std::move(studies));
}

Dataset parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_text(buf.str());
}

}  // namespace metamix::io
