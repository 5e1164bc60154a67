// Property suites on randomly generated inputs. Every generator is seeded, so
// failures reproduce exactly.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "metamix/bayes.hpp"
#include "metamix/freq.hpp"
#include "metamix/numerics.hpp"

using Catch::Approx;
using namespace metamix;

namespace {

Dataset random_dataset(std::mt19937_64& rng, std::size_t k_min, std::size_t k_max) {
  std::uniform_int_distribution<std::size_t> size(k_min, k_max);
  std::normal_distribution<double> effect(0.3, 0.8);
  std::uniform_real_distribution<double> se(0.1, 1.0);
  const std::size_t k = size(rng);
  std::vector<Study> rows;
  for (std::size_t i = 0; i < k; ++i) rows.push_back({"s" + std::to_string(i), effect(rng), se(rng)});
  return Dataset(rows);
}

NormalMixture random_mixture(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::normal_distribution<double> mean(0.0, 2.0);
  std::uniform_real_distribution<double> sd(0.2, 2.0);
  std::vector<NormalComponent> cs;
  const int n = size(rng);
  for (int i = 0; i < n; ++i) cs.push_back({weight(rng), mean(rng), sd(rng)});
  return NormalMixture(cs);
}

Dataset transformed(const Dataset& d, double shift, double scale) {
  std::vector<Study> rows;
  for (const auto& s : d) rows.push_back({s.label, scale * s.y + shift, scale * s.sigma});
  return Dataset(rows);
}

struct BayesOutputs {
  std::vector<double> mu;   // location-type outputs
  std::vector<double> tau;  // heterogeneity outputs
  double mu_sd = 0.0;
};

BayesOutputs bayes_outputs(const Model& model) {
  const auto tp = build_tau_posterior(model);
  const auto mix = mu_marginal_mixture(tp);
  BayesOutputs out;
  for (double p : {0.025, 0.5, 0.975}) out.mu.push_back(mixture_quantile(mix, p));
  const auto s = credible_interval(mix, 0.95, IntervalKind::shortest);
  out.mu.push_back(s.lo);
  out.mu.push_back(s.hi);
  const auto mm = moment_matched_normal(mix);
  out.mu.push_back(mm.mean);
  out.mu_sd = mm.sd;
  const auto ts = tau_posterior_summary(tp, 0.95);
  out.tau = {ts.median, ts.interval.lo, ts.interval.hi, ts.mean};
  return out;
}

}  // namespace

TEST_CASE("translation equivariance", "[properties]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  for (int rep = 0; rep < 25; ++rep) {
    const auto d = random_dataset(rng, 1, 6);
    const double c = shift(rng);
    const auto moved = transformed(d, c, 1.0);
    CAPTURE(rep, c, d.size());

    const auto a = bayes_outputs(Model{d, HalfNormal{0.5}});
    const auto b = bayes_outputs(Model{moved, HalfNormal{0.5}});
    for (std::size_t i = 0; i < a.mu.size(); ++i) CHECK(b.mu[i] == Approx(a.mu[i] + c).margin(1e-9));
    for (std::size_t i = 0; i < a.tau.size(); ++i) CHECK(b.tau[i] == Approx(a.tau[i]).margin(1e-9));

    const auto ma = mu_marginal_mixture(Model{d, HalfNormal{0.5}});
    const auto mb = mu_marginal_mixture(Model{moved, HalfNormal{0.5}});
    REQUIRE(ma.size() == mb.size());
    for (std::size_t i = 0; i < ma.size(); ++i) {
      CHECK(mb.components()[i].mean == Approx(ma.components()[i].mean + c).margin(1e-9));
    }

    if (d.size() >= 2) {
      for (auto tm : {TauMethod::dl, TauMethod::reml}) {
        const auto fa = hksj_interval(d, tm, 0.95);
        const auto fb = hksj_interval(moved, tm, 0.95);
        CHECK(fb.mu_hat == Approx(fa.mu_hat + c).margin(1e-9));
        CHECK(fb.interval.lo == Approx(fa.interval.lo + c).margin(1e-9));
        CHECK(fb.interval.hi == Approx(fa.interval.hi + c).margin(1e-9));
        CHECK(fb.tau_hat == Approx(fa.tau_hat).margin(1e-9));
      }
      const auto qa = q_profile_interval(d, 0.95);
      const auto qb = q_profile_interval(moved, 0.95);
      CHECK(qb.lo == Approx(qa.lo).margin(1e-9));
      CHECK(qb.hi == Approx(qa.hi).margin(1e-9));
    }
  }
}

TEST_CASE("scale equivariance", "[properties]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
  for (int rep = 0; rep < 25; ++rep) {
    const auto d = random_dataset(rng, 1, 6);
    const double c = std::exp(log_scale(rng));
    const auto scaled = transformed(d, 0.0, c);
    CAPTURE(rep, c, d.size());

    const HeterogeneityPrior priors[] = {HalfNormal{0.5}, UniformTau{2.0}};
    for (const auto& prior : priors) {
      const auto a = bayes_outputs(Model{d, prior});
      const auto b = bayes_outputs(Model{scaled, rescaled(prior, c)});
      for (std::size_t i = 0; i < a.mu.size(); ++i) {
        CHECK(b.mu[i] == Approx(c * a.mu[i]).epsilon(1e-9).margin(1e-12 * c));
      }
      for (std::size_t i = 0; i < a.tau.size(); ++i) {
        CHECK(b.tau[i] == Approx(c * a.tau[i]).epsilon(1e-9).margin(1e-12 * c));
      }
      CHECK(b.mu_sd == Approx(c * a.mu_sd).epsilon(1e-9));
    }

    if (d.size() >= 2) {
      CHECK(dl_tau(scaled) == Approx(c * dl_tau(d)).epsilon(1e-9).margin(1e-12 * c));
      CHECK(reml_tau(scaled) == Approx(c * reml_tau(d)).epsilon(1e-9).margin(1e-12 * c));
      const auto qa = q_profile_interval(d, 0.95);
      const auto qb = q_profile_interval(scaled, 0.95);
      CHECK(qb.lo == Approx(c * qa.lo).epsilon(1e-9).margin(1e-12 * c));
      CHECK(qb.hi == Approx(c * qa.hi).epsilon(1e-9).margin(1e-12 * c));
      const auto ra = random_effects_normal(d, TauMethod::reml, 0.95);
      const auto rb = random_effects_normal(scaled, TauMethod::reml, 0.95);
      CHECK(rb.interval.lo == Approx(c * ra.interval.lo).epsilon(1e-9).margin(1e-12 * c));
      CHECK(rb.interval.hi == Approx(c * ra.interval.hi).epsilon(1e-9).margin(1e-12 * c));
    }
  }
}

TEST_CASE("Q is non-increasing in tau", "[properties]") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const auto d = random_dataset(rng, 2, 12);
    double prev = q_statistic(d, 0.0);
    for (double t = 0.02; t <= 5.0; t += 0.02) {
      const double q = q_statistic(d, t);
      CHECK(q <= prev * (1.0 + 1e-14));
      CHECK(q >= 0.0);
      prev = q;
    }
  }
}

TEST_CASE("mixture CDF and density", "[properties]") {
  std::mt19937_64 rng(14);
  auto check_mixture = [](const NormalMixture& m) {
    const auto mm = moment_matched_normal(m);
    double lo = mm.mean;
    double hi = mm.mean;
    for (const auto& c : m.components()) {
      lo = std::min(lo, c.mean - 12.0 * c.sd);
      hi = std::max(hi, c.mean + 12.0 * c.sd);
    }
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double v = mixture_cdf(m, lo + (hi - lo) * i / 400.0);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(mixture_cdf(m, lo) == Approx(0.0).margin(1e-12));
    CHECK(mixture_cdf(m, hi) == Approx(1.0).margin(1e-12));
    const double mass = integrate([&](double x) { return mixture_density(m, x); }, {lo, hi}, 1e-10);
    CHECK(mass == Approx(1.0).margin(1e-6));
  };

  for (int rep = 0; rep < 50; ++rep) check_mixture(random_mixture(rng));
  for (int rep = 0; rep < 10; ++rep) {
    check_mixture(mu_marginal_mixture(Model{random_dataset(rng, 1, 6), HalfNormal{0.5}}));
  }
}

TEST_CASE("posterior variance bound", "[properties]") {
  // Integrating over tau can only add variance to the tau = 0 conditional.
  std::mt19937_64 rng(15);
  const HeterogeneityPrior priors[] = {HalfNormal{0.5}, HalfCauchy{0.5}, UniformTau{2.0}};
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_dataset(rng, 1, 8);
    const double floor_sd = std::sqrt(conditional_mu_moments(d, 0.0, ImproperUniform{}).variance);
    for (const auto& prior : priors) {
      const auto mm = moment_matched_normal(mu_marginal_mixture(Model{d, prior}));
      CHECK(mm.sd >= floor_sd);
    }
  }
}

TEST_CASE("HKSJ and normal intervals share the estimate", "[properties]") {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 100; ++rep) {
    const auto d = random_dataset(rng, 2, 12);
    for (auto tm : {TauMethod::dl, TauMethod::reml}) {
      const auto a = random_effects_normal(d, tm, 0.95);
      const auto b = hksj_interval(d, tm, 0.95);
      CHECK(a.mu_hat == b.mu_hat);
      CHECK(a.tau_hat == b.tau_hat);
      CHECK(b.interval.contains(b.mu_hat));
      CHECK(a.interval.contains(a.mu_hat));
    }
  }
}

TEST_CASE("shortest interval is never wider than central", "[properties]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> level(0.5, 0.99);
  for (int rep = 0; rep < 100; ++rep) {
    const auto m = random_mixture(rng);
    const double lv = level(rng);
    const auto s = credible_interval(m, lv, IntervalKind::shortest);
    const auto c = credible_interval(m, lv, IntervalKind::central);
    CHECK(s.width() <= c.width() + 1e-9);
    CHECK(mixture_cdf(m, s.hi) - mixture_cdf(m, s.lo) == Approx(lv).margin(1e-9));
  }
}
