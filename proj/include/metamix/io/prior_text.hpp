#pragma once

// Text grammar for priors, as used on the command line:
//
//   tau:  half-normal:<scale>  half-cauchy:<scale>  uniform:<upper>
//         log-normal:<mu>,<sd>  fixed:<value>
//   mu:   uniform  normal:<mean>,<sd>
//
// Formatting writes the shortest decimal that round-trips, so
// parse(format(p)) == p.

#include <string>
#include <string_view>

#include "metamix/priors.hpp"

namespace metamix::io {

HeterogeneityPrior parse_tau_prior(std::string_view text);
std::string format_tau_prior(const HeterogeneityPrior& p);

EffectPrior parse_effect_prior(std::string_view text);
std::string format_effect_prior(const EffectPrior& p);

/// Strict decimal parse of the whole string; throws DomainError with `what`.
double parse_number(std::string_view text, std::string_view what);
/// Shortest round-trip representation.
std::string format_number(double v);

}  // namespace metamix::io
