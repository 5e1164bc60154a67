#include "metamix/io/prior_text.hpp"

#include <charconv>
#include <vector>

#include "metamix/error.hpp"

namespace metamix::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_args(std::string_view text, std::string_view spec, std::size_t n) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number(text.substr(start, comma - start), spec));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.size() != n) {
    throw DomainError("prior '" + std::string(spec) + "': expected " + std::to_string(n) +
                      " parameter(s)");
  }
  return out;
}

}  // namespace

double parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DomainError("'" + std::string(what) + "': not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

HeterogeneityPrior parse_tau_prior(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw DomainError("tau prior '" + std::string(text) + "': expected <family>:<parameters>");
  }
  const auto family = text.substr(0, colon);
  const auto args = text.substr(colon + 1);
  HeterogeneityPrior p;
  if (family == "half-normal") {
    p = HalfNormal{parse_args(args, text, 1)[0]};
  } else if (family == "half-cauchy") {
    p = HalfCauchy{parse_args(args, text, 1)[0]};
  } else if (family == "uniform") {
    p = UniformTau{parse_args(args, text, 1)[0]};
  } else if (family == "log-normal") {
    const auto v = parse_args(args, text, 2);
    p = LogNormal{v[0], v[1]};
  } else if (family == "fixed") {
    p = PointMass{parse_args(args, text, 1)[0]};
  } else {
    throw DomainError("tau prior '" + std::string(text) + "': unknown family '" +
                      std::string(family) + "'");
  }
  validate(p);
  return p;
}

std::string format_tau_prior(const HeterogeneityPrior& p) {
  if (const auto* h = std::get_if<HalfNormal>(&p)) return "half-normal:" + format_number(h->scale);
  if (const auto* h = std::get_if<HalfCauchy>(&p)) return "half-cauchy:" + format_number(h->scale);
  if (const auto* u = std::get_if<UniformTau>(&p)) return "uniform:" + format_number(u->upper);
  if (const auto* l = std::get_if<LogNormal>(&p)) {
    return "log-normal:" + format_number(l->mu_log) + "," + format_number(l->sd_log);
  }
  return "fixed:" + format_number(std::get<PointMass>(p).value);
}

EffectPrior parse_effect_prior(std::string_view text) {
  text = trim(text);
  if (text == "uniform") return ImproperUniform{};
  constexpr std::string_view normal = "normal:";
  if (text.substr(0, normal.size()) == normal) {
    const auto v = parse_args(text.substr(normal.size()), text, 2);
    EffectPrior p = NormalEffect{v[0], v[1]};
    validate(p);
    return p;
  }
  throw DomainError("effect prior '" + std::string(text) +
                    "': expected 'uniform' or 'normal:<mean>,<sd>'");
}

std::string format_effect_prior(const EffectPrior& p) {
  if (const auto* n = std::get_if<NormalEffect>(&p)) {
    return "normal:" + format_number(n->mean) + "," + format_number(n->sd);
  }
  return "uniform";
}

}  // namespace metamix::io
