#include "metamix/priors.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "metamix/error.hpp"
#include "metamix/numerics.hpp"

namespace metamix {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

LogNormal LogNormal::from_quantile(double q, double value, double sd_log) {
  require_positive(value, "log-normal quantile value");
  require_positive(sd_log, "log-normal sd");
  return {std::log(value) - sd_log * normal_quantile(q), sd_log};
}

void validate(const HeterogeneityPrior& p) {
  std::visit(overloaded{
                 [](const HalfNormal& h) { require_positive(h.scale, "half-normal scale"); },
                 [](const HalfCauchy& h) { require_positive(h.scale, "half-Cauchy scale"); },
                 [](const UniformTau& u) { require_positive(u.upper, "uniform upper bound"); },
                 [](const LogNormal& l) {
                   if (!std::isfinite(l.mu_log)) throw DomainError("log-normal mu must be finite");
                   require_positive(l.sd_log, "log-normal sd");
                 },
                 [](const PointMass& m) {
                   if (!(m.value >= 0.0) || !std::isfinite(m.value)) {
                     throw DomainError("fixed tau must be nonnegative and finite");
                   }
                 },
             },
             p);
}

void validate(const EffectPrior& p) {
  if (const auto* n = std::get_if<NormalEffect>(&p)) {
    if (!std::isfinite(n->mean)) throw DomainError("normal effect prior mean must be finite");
    require_positive(n->sd, "normal effect prior sd");
  }
}

double tau_prior_log_density(const HeterogeneityPrior& p, double tau) {
  if (tau < 0.0) throw DomainError("tau_prior_density: tau must be nonnegative");
  return std::visit(
      overloaded{
          [&](const HalfNormal& h) {
            const double z = tau / h.scale;
            return 0.5 * std::log(2.0 / std::numbers::pi) - std::log(h.scale) - 0.5 * z * z;
          },
          [&](const HalfCauchy& h) {
            const double z = tau / h.scale;
            return std::log(2.0 / std::numbers::pi) - std::log(h.scale) - std::log1p(z * z);
          },
          [&](const UniformTau& u) { return tau <= u.upper ? -std::log(u.upper) : -kInf; },
          [&](const LogNormal& l) {
            if (tau == 0.0) return -kInf;
            const double z = (std::log(tau) - l.mu_log) / l.sd_log;
            return normal_log_pdf(z) - std::log(l.sd_log) - std::log(tau);
          },
          [](const PointMass&) -> double {
            throw DomainError("a fixed-tau prior has no density");
          },
      },
      p);
}

double tau_prior_density(const HeterogeneityPrior& p, double tau) {
  return std::exp(tau_prior_log_density(p, tau));
}

double tau_prior_cdf(const HeterogeneityPrior& p, double tau) {
  if (tau <= 0.0) {
    return is_point_mass(p) && std::get<PointMass>(p).value == 0.0 && tau == 0.0 ? 1.0 : 0.0;
  }
  return std::visit(
      overloaded{
          [&](const HalfNormal& h) { return 2.0 * normal_cdf(tau / h.scale) - 1.0; },
          [&](const HalfCauchy& h) { return 2.0 / std::numbers::pi * std::atan(tau / h.scale); },
          [&](const UniformTau& u) { return std::min(1.0, tau / u.upper); },
          [&](const LogNormal& l) { return normal_cdf((std::log(tau) - l.mu_log) / l.sd_log); },
          [&](const PointMass& m) { return tau >= m.value ? 1.0 : 0.0; },
      },
      p);
}

double tau_prior_quantile(const HeterogeneityPrior& p, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("tau_prior_quantile: probability must lie in (0, 1)");
  }
  return std::visit(
      overloaded{
          [&](const HalfNormal& h) { return h.scale * normal_quantile(0.5 + 0.5 * q); },
          [&](const HalfCauchy& h) { return h.scale * std::tan(0.5 * std::numbers::pi * q); },
          [&](const UniformTau& u) { return u.upper * q; },
          [&](const LogNormal& l) { return std::exp(l.mu_log + l.sd_log * normal_quantile(q)); },
          [&](const PointMass& m) { return m.value; },
      },
      p);
}

double tau_prior_support_upper(const HeterogeneityPrior& p) noexcept {
  if (const auto* u = std::get_if<UniformTau>(&p)) return u->upper;
  if (const auto* m = std::get_if<PointMass>(&p)) return m->value;
  return kInf;
}

HeterogeneityPrior rescaled(const HeterogeneityPrior& p, double c) {
  require_positive(c, "scale factor");
  return std::visit(
      overloaded{
          [&](const HalfNormal& h) -> HeterogeneityPrior { return HalfNormal{h.scale * c}; },
          [&](const HalfCauchy& h) -> HeterogeneityPrior { return HalfCauchy{h.scale * c}; },
          [&](const UniformTau& u) -> HeterogeneityPrior { return UniformTau{u.upper * c}; },
          [&](const LogNormal& l) -> HeterogeneityPrior {
            return LogNormal{l.mu_log + std::log(c), l.sd_log};
          },
          [&](const PointMass& m) -> HeterogeneityPrior { return PointMass{m.value * c}; },
      },
      p);
}

}  // namespace metamix
