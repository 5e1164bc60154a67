#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

constexpr long double kPi = 3.141592653589793238462643383279502884L;

long double std_normal_density(long double z) {
  return std::exp(-0.5L * z * z) / std::sqrt(2.0L * kPi);
}

// Linear interpolation of the inverse of a nondecreasing table.
double invert_table(const std::vector<double>& xs, const std::vector<double>& cdf, double p) {
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
  if (it == cdf.begin()) return xs.front();
  if (it == cdf.end()) return xs.back();
  const auto j = static_cast<std::size_t>(it - cdf.begin());
  const double c0 = cdf[j - 1];
  const double c1 = cdf[j];
  const double t = c1 > c0 ? (p - c0) / (c1 - c0) : 0.0;
  return xs[j - 1] + t * (xs[j] - xs[j - 1]);
}

}  // namespace

double normal_cdf_series(double x) {
  // Phi(x) = 1/2 + phi-series: sum_n (-1)^n x^(2n+1) / (2^n n! (2n+1)) / sqrt(2 pi)
  const long double xl = x;
  long double term = xl;  // (-1)^n x^(2n+1) / (2^n n!)
  long double sum = 0.0L;
  for (int n = 0; n < 400; ++n) {
    const long double contrib = term / (2 * n + 1);
    sum += contrib;
    if (n > 5 && std::abs(contrib) < 1e-30L) break;
    term *= -xl * xl / (2.0L * (n + 1));
  }
  return static_cast<double>(0.5L + sum / std::sqrt(2.0L * kPi));
}

double gamma_p_series(double a, double x) {
  if (x <= 0.0) return 0.0;
  const long double al = a;
  const long double xl = x;
  long double term = 1.0L / al;
  long double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= xl / (al + n);
    sum += term;
    if (term < sum * 1e-22L) break;
  }
  return static_cast<double>(sum * std::exp(-xl + al * std::log(xl) - std::lgamma(al)));
}

double bisect(const std::function<double(double)>& g, double target, double lo, double hi,
              int iterations) {
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double student_t_cdf_quadrature(double t, double dof, int panels) {
  const long double nu = dof;
  const long double c = std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2)) /
                        std::sqrt(nu * kPi);
  auto f = [&](long double u) { return c * std::pow(1.0L + u * u / nu, -(nu + 1) / 2); };
  const long double a = 0.0L;
  const long double b = std::abs(t);
  const long double h = (b - a) / panels;
  long double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0L : 2.0L);
  const long double area = s * h / 3.0L;
  return static_cast<double>(t >= 0 ? 0.5L + area : 0.5L - area);
}

double cos_fixed_point() {
  double x = 0.5;
  for (int i = 0; i < 2000; ++i) x = std::cos(x);
  return x;
}

double TauPriorSpec::density(double tau) const {
  if (tau < 0.0) return 0.0;
  switch (kind) {
    case TauPriorKind::half_normal:
      return 2.0 * static_cast<double>(std_normal_density(tau / param)) / param;
    case TauPriorKind::uniform:
      return tau <= param ? 1.0 / param : 0.0;
    case TauPriorKind::half_cauchy:
      return 2.0 / (std::numbers::pi * param * (1.0 + (tau / param) * (tau / param)));
  }
  return 0.0;
}

double TauPriorSpec::quantile(double q) const {
  switch (kind) {
    case TauPriorKind::half_normal:
      // Bisection on 2 Phi(t / s) - 1 using the series CDF.
      return param * bisect([](double z) { return 2.0 * normal_cdf_series(z) - 1.0; }, q, 0.0,
                            6.0);
    case TauPriorKind::uniform:
      return q * param;
    case TauPriorKind::half_cauchy:
      return param * std::tan(0.5 * std::numbers::pi * q);
  }
  return 0.0;
}

double TauPriorSpec::support_upper() const {
  return kind == TauPriorKind::uniform ? param : std::numeric_limits<double>::infinity();
}

RiemannPosterior::RiemannPosterior(const Data& data, const TauPriorSpec& prior, double mu_step,
                                   double tau_step)
    : data_(data), prior_(prior), tau_step_(tau_step) {
  const double max_sigma = *std::max_element(data.sigma.begin(), data.sigma.end());
  const auto [ymin, ymax] = std::minmax_element(data.y.begin(), data.y.end());
  const double prior_q = prior.quantile(1.0 - 1e-7);
  tau_max_ = std::min(std::max(prior_q, 10.0 * (max_sigma + (*ymax - *ymin))),
                      prior.support_upper());

  const std::size_t n_tau = static_cast<std::size_t>(std::ceil(tau_max_ / tau_step)) + 1;
  tau_.resize(n_tau);
  for (std::size_t j = 0; j < n_tau; ++j) tau_[j] = std::min(tau_max_, j * tau_step);
  if (n_tau >= 2 && tau_[n_tau - 1] == tau_[n_tau - 2]) tau_.pop_back();

  // Coarse pilot pass to locate mu, then the fine pass on mean +- 10 sd.
  const double spread = 10.0 * (max_sigma + (*ymax - *ymin) + std::min(tau_max_, 5.0));
  fill(*ymin - spread, *ymax + spread, 0.1);
  double m1 = 0.0;
  double m2 = 0.0;
  const std::size_t n_mu = mu_.size();
  for (std::size_t j = 0; j < tau_.size(); ++j) {
    for (std::size_t i = 0; i < n_mu; ++i) {
      const double w = joint_[j * n_mu + i];
      m1 += w * mu_[i];
      m2 += w * mu_[i] * mu_[i];
    }
  }
  const double sd = std::sqrt(m2 - m1 * m1);
  fill(m1 - 10.0 * sd, m1 + 10.0 * sd, mu_step);
}

void RiemannPosterior::fill(double mu_lo, double mu_hi, double mu_step) {
  const std::size_t n_mu = static_cast<std::size_t>(std::ceil((mu_hi - mu_lo) / mu_step)) + 1;
  mu_.resize(n_mu);
  for (std::size_t i = 0; i < n_mu; ++i) mu_[i] = mu_lo + i * mu_step;
  const std::size_t n_tau = tau_.size();
  joint_.assign(n_tau * n_mu, 0.0);

  // Log joint density first, then weights relative to the peak.
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n_tau; ++j) {
    const double tau = tau_[j];
    const double prior = prior_.density(tau);
    for (std::size_t i = 0; i < n_mu; ++i) {
      double lp = -std::numeric_limits<double>::infinity();
      if (prior > 0.0) {
        lp = std::log(prior);
        for (std::size_t s = 0; s < data_.y.size(); ++s) {
          const double v = data_.sigma[s] * data_.sigma[s] + tau * tau;
          const double r = data_.y[s] - mu_[i];
          lp += -0.5 * std::log(v) - 0.5 * r * r / v;
        }
      }
      joint_[j * n_mu + i] = lp;
      peak = std::max(peak, lp);
    }
  }

  std::vector<double> tau_density(n_tau, 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < n_tau; ++j) {
    // Trapezoid weight of node j in tau; plain Riemann sum in mu.
    const double left = j > 0 ? tau_[j] - tau_[j - 1] : 0.0;
    const double right = j + 1 < n_tau ? tau_[j + 1] - tau_[j] : 0.0;
    const double tau_weight = 0.5 * (left + right);
    double row = 0.0;
    for (std::size_t i = 0; i < n_mu; ++i) {
      const double u = std::exp(joint_[j * n_mu + i] - peak);
      row += u;
      joint_[j * n_mu + i] = tau_weight * u;
      total += tau_weight * u;
    }
    tau_density[j] = row;
  }
  for (double& w : joint_) w /= total;

  mu_marginal_cdf_.assign(n_mu, 0.0);
  std::vector<double> mu_mass(n_mu, 0.0);
  for (std::size_t j = 0; j < n_tau; ++j) {
    for (std::size_t i = 0; i < n_mu; ++i) mu_mass[i] += joint_[j * n_mu + i];
  }
  tau_marginal_cdf_.assign(n_tau, 0.0);
  double c = 0.0;
  for (std::size_t i = 0; i < n_mu; ++i) {
    c += mu_mass[i];
    mu_marginal_cdf_[i] = c;
  }
  double t = 0.0;
  for (std::size_t j = 1; j < n_tau; ++j) {
    t += 0.5 * (tau_density[j - 1] + tau_density[j]) * (tau_[j] - tau_[j - 1]);
    tau_marginal_cdf_[j] = t;
  }
  for (double& v : tau_marginal_cdf_) v /= t;
}

double RiemannPosterior::mu_cdf(double x) const {
  // Mass of cell i sits on [mu_i - h/2, mu_i + h/2].
  const double h = mu_[1] - mu_[0];
  std::vector<double> edges(mu_.size());
  for (std::size_t i = 0; i < mu_.size(); ++i) edges[i] = mu_[i] + 0.5 * h;
  const auto it = std::lower_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0.0;
  if (it == edges.end()) return 1.0;
  const auto j = static_cast<std::size_t>(it - edges.begin());
  const double frac = (x - edges[j - 1]) / h;
  return mu_marginal_cdf_[j - 1] + frac * (mu_marginal_cdf_[j] - mu_marginal_cdf_[j - 1]);
}

double RiemannPosterior::mu_quantile(double p) const {
  const double h = mu_[1] - mu_[0];
  std::vector<double> edges(mu_.size());
  for (std::size_t i = 0; i < mu_.size(); ++i) edges[i] = mu_[i] + 0.5 * h;
  return invert_table(edges, mu_marginal_cdf_, p);
}

double RiemannPosterior::tau_quantile(double p) const {
  return invert_table(tau_, tau_marginal_cdf_, p);
}

double RiemannPosterior::theta_cdf(std::size_t study, double x) const {
  const double y = data_.y.at(study);
  const double s2 = data_.sigma.at(study) * data_.sigma.at(study);
  const std::size_t n_mu = mu_.size();
  double total = 0.0;
  for (std::size_t j = 0; j < tau_.size(); ++j) {
    const double t2 = tau_[j] * tau_[j];
    for (std::size_t i = 0; i < n_mu; ++i) {
      const double w = joint_[j * n_mu + i];
      if (w < 1e-15) continue;  // negligible cells
      double cond;
      if (t2 == 0.0) {
        cond = x >= mu_[i] ? 1.0 : 0.0;
      } else {
        const double prec = 1.0 / s2 + 1.0 / t2;
        const double mean = (y / s2 + mu_[i] / t2) / prec;
        cond = normal_cdf_series(std::clamp((x - mean) * std::sqrt(prec), -8.0, 8.0));
      }
      total += w * cond;
    }
  }
  return total;
}

double log_integrated_likelihood(const Data& data, double tau) {
  constexpr double h = 0.005;
  long double s = 0.0L;
  for (int i = 0; i <= 4000; ++i) {
    const double mu = -10.0 + i * h;
    long double lp = 0.0L;
    for (std::size_t k = 0; k < data.y.size(); ++k) {
      const long double v = static_cast<long double>(data.sigma[k]) * data.sigma[k] + tau * tau;
      const long double r = data.y[k] - mu;
      lp += -0.5L * std::log(2.0L * kPi * v) - 0.5L * r * r / v;
    }
    s += std::exp(lp) * h;
  }
  return static_cast<double>(std::log(s));
}

}  // namespace oracle
