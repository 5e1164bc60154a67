#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "metamix/error.hpp"
#include "metamix/freq.hpp"
#include "metamix/io/csv.hpp"
#include "metamix/numerics.hpp"
#include "oracle.hpp"

using Catch::Approx;
using namespace metamix;

namespace {

Dataset two_studies() { return Dataset({{"a", 0.0, 1.0}, {"b", 2.0, 1.0}}); }

Dataset homogeneous(double c) { return Dataset({{"a", c, 0.4}, {"b", c, 1.3}, {"c", c, 0.7}}); }

// Restricted log-likelihood written out from the definition.
double reml_objective(const Dataset& d, double tau) {
  double sw = 0.0;
  double swy = 0.0;
  double slog = 0.0;
  for (const auto& s : d) {
    const double v = s.sigma * s.sigma + tau * tau;
    sw += 1.0 / v;
    swy += s.y / v;
    slog += std::log(v);
  }
  const double mu = swy / sw;
  double ss = 0.0;
  for (const auto& s : d) ss += (s.y - mu) * (s.y - mu) / (s.sigma * s.sigma + tau * tau);
  return -0.5 * (slog + std::log(sw) + ss);
}

double grid_argmax(const Dataset& d, double hi, double step) {
  double best_tau = 0.0;
  double best = reml_objective(d, 0.0);
  for (double t = step; t <= hi; t += step) {
    const double v = reml_objective(d, t);
    if (v > best) {
      best = v;
      best_tau = t;
    }
  }
  return best_tau;
}

}  // namespace

TEST_CASE("common_effect", "[freq]") {
  const auto r = common_effect(two_studies(), 0.95);
  const double z = oracle::bisect([](double x) { return oracle::normal_cdf_series(x); }, 0.975,
                                  0.0, 5.0);
  CHECK(r.mu_hat == Approx(1.0).margin(1e-15));
  CHECK(r.se_mu == Approx(std::sqrt(0.5)).margin(1e-15));
  CHECK(r.interval.lo == Approx(1.0 - z * std::sqrt(0.5)).margin(1e-10));
  CHECK(r.interval.lo == Approx(-0.38590).margin(5e-6));
  CHECK(r.interval.hi == Approx(2.38590).margin(5e-6));
  CHECK(r.tau_hat == 0.0);
  CHECK(r.method == FreqMethod::common);

  const auto one = common_effect(Dataset({{"x", 0.7, 0.2}}), 0.9);
  CHECK(one.mu_hat == 0.7);
  CHECK(one.se_mu == Approx(0.2).margin(1e-15));

  CHECK(common_effect(homogeneous(-0.3), 0.95).mu_hat == Approx(-0.3).margin(1e-15));
  CHECK_THROWS_AS(common_effect(two_studies(), 1.5), DomainError);
}

TEST_CASE("q_statistic", "[freq]") {
  CHECK(q_statistic(two_studies(), 0.0) == Approx(2.0).margin(1e-14));
  CHECK(q_statistic(two_studies(), 1.0) == Approx(1.0).margin(1e-14));
  for (double t : {0.0, 0.3, 4.0}) CHECK(q_statistic(homogeneous(1.2), t) == Approx(0.0).margin(1e-14));
  CHECK_THROWS_AS(q_statistic(Dataset({{"x", 0.0, 1.0}}), 0.0), DataError);
}

TEST_CASE("dl_tau", "[freq]") {
  CHECK(dl_tau(two_studies()) == Approx(1.0).margin(1e-14));
  CHECK(dl_tau(homogeneous(0.5)) == 0.0);
  // Q(0) = 0.5 <= k - 1.
  CHECK(dl_tau(Dataset({{"a", 0.0, 1.0}, {"b", 1.0, 1.0}})) == 0.0);
  CHECK_THROWS_AS(dl_tau(Dataset({{"x", 0.0, 1.0}})), DataError);
}

TEST_CASE("reml_tau", "[freq]") {
  CHECK(reml_tau(homogeneous(2.0)) == 0.0);

  SECTION("two studies against a dense grid") {
    const double ref = grid_argmax(two_studies(), 5.0, 1e-4);
    CHECK(reml_tau(two_studies()) == Approx(ref).margin(1e-4));
    // Equal variances: tau^2 = sample variance - sigma^2 = 1.
    CHECK(reml_tau(two_studies()) == Approx(1.0).margin(1e-6));
  }

  SECTION("unequal variances against a dense grid") {
    const Dataset d({{"a", -0.5, 0.4}, {"b", 0.1, 0.3}, {"c", 0.9, 0.5}, {"d", 1.4, 0.2}});
    const double ref = grid_argmax(d, 5.0, 1e-4);
    CHECK(reml_tau(d) == Approx(ref).margin(1e-4));
    CHECK(restricted_log_likelihood(d, reml_tau(d)) >= restricted_log_likelihood(d, ref) - 1e-12);
  }

  SECTION("scales with the data") {
    const Dataset d({{"a", -0.5, 0.4}, {"b", 0.1, 0.3}, {"c", 0.9, 0.5}});
    const Dataset e({{"a", -1.5, 1.2}, {"b", 0.3, 0.9}, {"c", 2.7, 1.5}});
    CHECK(reml_tau(e) == Approx(3.0 * reml_tau(d)).epsilon(1e-9));
  }

  CHECK_THROWS_AS(reml_tau(Dataset({{"x", 0.0, 1.0}})), DataError);
}

TEST_CASE("random_effects_normal", "[freq]") {
  const auto r = random_effects_normal(two_studies(), TauMethod::dl, 0.95);
  CHECK(r.tau_hat == Approx(1.0).margin(1e-14));
  CHECK(r.mu_hat == Approx(1.0).margin(1e-14));
  CHECK(r.se_mu == Approx(1.0).margin(1e-14));
  CHECK(r.interval.lo == Approx(-0.95996).margin(5e-6));
  CHECK(r.interval.hi == Approx(2.95996).margin(5e-6));
  CHECK(r.method == FreqMethod::dl);

  SECTION("tau_hat = 0 reproduces the common-effect analysis exactly") {
    const Dataset d({{"a", 0.0, 1.0}, {"b", 1.0, 1.0}, {"c", 0.4, 0.6}});
    for (auto m : {TauMethod::dl, TauMethod::reml}) {
      const auto re = random_effects_normal(d, m, 0.95);
      const auto ce = common_effect(d, 0.95);
      REQUIRE(re.tau_hat == 0.0);
      CHECK(re.mu_hat == ce.mu_hat);
      CHECK(re.se_mu == ce.se_mu);
      CHECK(re.interval.lo == ce.interval.lo);
      CHECK(re.interval.hi == ce.interval.hi);
    }
  }
}

TEST_CASE("hksj_interval", "[freq]") {
  const auto r = hksj_interval(two_studies(), TauMethod::dl, 0.95);
  CHECK(r.mu_hat == Approx(1.0).margin(1e-14));
  CHECK(r.interval.hi - r.mu_hat == Approx(12.70620).margin(5e-6));
  CHECK(r.interval.hi - r.mu_hat == Approx(std::tan(std::numbers::pi * 0.475)).margin(1e-9));
  CHECK_FALSE(r.degenerate);

  const auto h = hksj_interval(homogeneous(0.25), TauMethod::reml, 0.95);
  CHECK(h.degenerate);
  CHECK(h.interval.lo == Approx(0.25).margin(1e-15));
  CHECK(h.interval.hi == Approx(0.25).margin(1e-15));

  SECTION("twelve-study set against the formula") {
    const auto d = io::parse_csv(std::string(METAMIX_DATA_DIR) + "/synthetic/counts12.csv");
    REQUIRE(d.size() == 12);
    for (auto m : {TauMethod::dl, TauMethod::reml}) {
      for (bool modified : {false, true}) {
        const double tau = estimate_tau(d, m);
        double sw = 0.0;
        double swy = 0.0;
        for (const auto& s : d) {
          sw += 1.0 / (s.sigma * s.sigma + tau * tau);
          swy += s.y / (s.sigma * s.sigma + tau * tau);
        }
        const double mu = swy / sw;
        double q = 0.0;
        for (const auto& s : d) q += (s.y - mu) * (s.y - mu) / (s.sigma * s.sigma + tau * tau);
        q /= 11.0;
        if (modified) q = std::max(q, 1.0);
        const double t = oracle::bisect(
            [](double x) { return oracle::student_t_cdf_quadrature(x, 11.0, 20000); }, 0.975, 0.0,
            10.0, 60);
        const double half = t * std::sqrt(q / sw);

        const auto got = hksj_interval(d, m, 0.95, modified);
        CHECK(got.mu_hat == Approx(mu).margin(1e-12));
        CHECK(got.interval.lo == Approx(mu - half).margin(1e-8));
        CHECK(got.interval.hi == Approx(mu + half).margin(1e-8));
        CHECK(got.mu_hat == random_effects_normal(d, m, 0.95).mu_hat);
      }
    }
  }

  CHECK_THROWS_AS(hksj_interval(Dataset({{"x", 0.0, 1.0}}), TauMethod::dl, 0.95), DataError);
}

TEST_CASE("q_profile_interval", "[freq]") {
  const auto iv = q_profile_interval(two_studies(), 0.95);
  CHECK(iv.lo == 0.0);
  const double target = chisq_quantile(0.025, 1.0);
  CHECK(target == Approx(0.000982).margin(5e-7));
  const double closed = std::sqrt(2.0 / target - 1.0);
  CHECK(iv.hi == Approx(closed).epsilon(1e-9));
  CHECK(iv.hi == Approx(45.12).margin(5e-3));

  const auto flat = q_profile_interval(homogeneous(0.1), 0.95);
  CHECK(flat.lo == 0.0);
  CHECK(flat.hi == 0.0);

  SECTION("bounds solve Q(tau) = chi-square quantile") {
    const Dataset d({{"a", -0.9, 0.2}, {"b", 0.1, 0.3}, {"c", 0.9, 0.25}, {"d", 1.6, 0.2}});
    const auto qp = q_profile_interval(d, 0.95);
    REQUIRE(qp.lo > 0.0);
    CHECK(q_statistic(d, qp.lo) == Approx(chisq_quantile(0.975, 3.0)).epsilon(1e-8));
    CHECK(q_statistic(d, qp.hi) == Approx(chisq_quantile(0.025, 3.0)).epsilon(1e-8));
  }

  CHECK_THROWS_AS(q_profile_interval(Dataset({{"x", 0.0, 1.0}}), 0.95), DataError);
}

TEST_CASE("method names", "[freq]") {
  CHECK(to_string(FreqMethod::hksj) == "hksj");
  CHECK(to_string(TauMethod::reml) == "reml");
}
