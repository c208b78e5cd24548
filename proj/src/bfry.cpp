#include <cmath>
#include <string>

#include "crm/distributions.hpp"
#include "crm/errors.hpp"
#include "crm/log.hpp"
#include "crm/special_math.hpp"

namespace crm::dist {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

void check_sigma(double sigma, const char* who) {
  require(sigma > 0.0 && sigma < 1.0, std::string(who) + ": sigma must lie in (0,1)");
}

// Beta(sigma, 1) on the log scale: log(U) / sigma.
double log_beta_sigma_one(double sigma, RngStream& rng) { return std::log(rng.uniform()) / sigma; }

}  // namespace

double sample_bfry(double sigma, RngStream& rng) {
  check_sigma(sigma, "bfry");
  const double g = sample_gamma(1.0 - sigma, 1.0, rng);
  return std::exp(std::log(g) - log_beta_sigma_one(sigma, rng));
}

double bfry_pdf(double w, double sigma) {
  check_sigma(sigma, "bfry");
  if (w <= 0.0) return 0.0;
  return sigma * std::exp(-(1.0 + sigma) * std::log(w) - math::log_gamma(1.0 - sigma)) * -std::expm1(-w);
}

double sample_etbfry(double sigma, double t, double tau, RngStream& rng) {
  check_sigma(sigma, "etbfry");
  require(t > 0.0 && tau >= 0.0, "etbfry: need t > 0 and tau >= 0");
  const double g = sample_gamma(1.0 - sigma, 1.0, rng);
  const double u = rng.uniform();
  const double s = std::pow(t + tau, sigma) * (1.0 - u) + std::pow(tau, sigma) * u;
  return g * std::pow(s, -1.0 / sigma);
}

double etbfry_pdf(double w, double sigma, double t, double tau) {
  check_sigma(sigma, "etbfry");
  require(t > 0.0 && tau >= 0.0, "etbfry: need t > 0 and tau >= 0");
  if (w <= 0.0) return 0.0;
  const double z = std::pow(t + tau, sigma) - std::pow(tau, sigma);
  return sigma * std::exp(-(1.0 + sigma) * std::log(w) - tau * w - math::log_gamma(1.0 - sigma)) *
         -std::expm1(-t * w) / z;
}

double sample_gbfry(double kappa, double sigma, RngStream& rng) {
  check_sigma(sigma, "gbfry");
  require(kappa > sigma, "gbfry: kappa must exceed sigma");
  const double g = sample_gamma(kappa - sigma, 1.0, rng);
  return std::exp(std::log(g) - log_beta_sigma_one(sigma, rng));
}

double gbfry_pdf(double w, double kappa, double sigma) {
  check_sigma(sigma, "gbfry");
  require(kappa > sigma, "gbfry: kappa must exceed sigma");
  if (w <= 0.0) return 0.0;
  return sigma * std::exp(-(1.0 + sigma) * std::log(w) - math::log_gamma(kappa - sigma)) *
         math::lower_incomplete_gamma(kappa, w);
}

// ---------------------------------------------------------------------------
// etgBFRY

void EtgBfryParams::validate(bool posterior) const {
  require(std::isfinite(kappa) && std::isfinite(sigma) && std::isfinite(t) && std::isfinite(tau),
          "etgbfry: parameters must be finite");
  require(kappa > 0.0, "etgbfry: kappa must be positive");
  require(kappa > sigma, "etgbfry: kappa must exceed sigma");
  require(t > 0.0, "etgbfry: t must be positive");
  require(tau >= 0.0, "etgbfry: tau must be nonnegative");
  if (!posterior) check_sigma(sigma, "etgbfry");
  if (sigma <= 0.0) require(tau > 0.0, "etgbfry: tau must be positive when sigma <= 0");
}

namespace {

double log_normalizer(const EtgBfryParams& p) {
  if (p.tau == 0.0) return math::log_gamma(p.kappa - p.sigma) + p.sigma * std::log(p.t) - std::log(p.sigma);
  const double y = p.tau / (p.t + p.tau);
  const double b = y < 0.5 ? math::incomplete_beta_complement(y, p.kappa, -p.sigma)
                           : math::incomplete_beta(p.t / (p.t + p.tau), p.kappa, -p.sigma);
  return p.sigma * std::log(p.tau) + math::log_gamma(p.kappa - p.sigma) + std::log(b);
}

// log of sum_j r_j relative to r_0, where r_j = x^{kappa+j} Gamma(kappa+j-sigma) / Gamma(kappa+j+1).
double log_mixture_total_over_r0(const EtgBfryParams& p) {
  const double x = p.t / (p.t + p.tau);
  const double log_total = log_normalizer(p) - math::log_gamma(p.kappa) - p.sigma * std::log(p.t + p.tau);
  const double log_r0 = p.kappa * std::log(x) + math::log_gamma(p.kappa - p.sigma) - math::log_gamma(p.kappa + 1.0);
  return log_total - log_r0;
}

constexpr double kMixtureCutoff = 0.99;
constexpr long kMaxComponents = 1'000'000;

}  // namespace

double etgbfry_normalizer(const EtgBfryParams& p) {
  p.validate(true);
  return std::exp(log_normalizer(p));
}

double etgbfry_pdf(const EtgBfryParams& p, double w) {
  p.validate(true);
  if (w <= 0.0) return 0.0;
  const double g = math::lower_incomplete_gamma(p.kappa, p.t * w);
  if (g == 0.0) return 0.0;
  return std::exp(-(p.sigma + 1.0) * std::log(w) - p.tau * w + std::log(g) - log_normalizer(p));
}

std::vector<double> etgbfry_mixture_weights(const EtgBfryParams& p, double tail_tol) {
  p.validate(true);
  require(p.tau > 0.0, "etgbfry mixture: tau must be positive");
  const double x = p.t / (p.t + p.tau);
  const double inv_total = std::exp(-log_mixture_total_over_r0(p));
  std::vector<double> w;
  double r = 1.0, cum = 0.0;
  for (long j = 0; j < kMaxComponents; ++j) {
    w.push_back(r * inv_total);
    cum += r;
    const double ratio = x * (p.kappa + j - p.sigma) / (p.kappa + j + 1.0);
    r *= ratio;
    // Ratios increase towards x, so r / (1 - x) bounds the remaining mass once they are below one.
    if (ratio < 1.0 && r / (1.0 - x) < tail_tol * cum) return w;
  }
  throw ConvergenceError("etgbfry mixture: too many components", cum * inv_total, 1.0 - cum * inv_total);
}

EtgBfrySampler::EtgBfrySampler(const EtgBfryParams& p) : p_(p) {
  p_.validate(true);
  x_ = p_.t / (p_.t + p_.tau);
  // Close to the untilted limit the mixture needs O(1/(1-x)) components;
  // there we propose from gBFRY/t and thin by e^{-tau w} instead.
  mixture_ = !(x_ > kMixtureCutoff && p_.sigma > 0.0 && p_.sigma < 1.0);
  if (mixture_) {
    r0_ = 1.0;
    total_ = std::exp(log_mixture_total_over_r0(p_));
  }
}

double EtgBfrySampler::operator()(RngStream& rng) const {
  if (!mixture_) {
    for (long i = 0; i < kMaxComponents; ++i) {
      const double w = sample_gbfry(p_.kappa, p_.sigma, rng) / p_.t;
      if (p_.tau == 0.0 || rng.uniform() < std::exp(-p_.tau * w)) return w;
    }
    throw ConvergenceError("etgbfry: rejection sampler stalled", 0.0, INFINITY);
  }
  const double u = rng.uniform() * total_;
  double r = r0_, cum = 0.0;
  for (long j = 0; j < kMaxComponents; ++j) {
    cum += r;
    if (u <= cum || (r < 1e-18 * total_ && cum >= total_ * (1.0 - 1e-12)))
      return sample_gamma(p_.kappa + j - p_.sigma, p_.t + p_.tau, rng);
    r *= x_ * (p_.kappa + j - p_.sigma) / (p_.kappa + j + 1.0);
  }
  throw ConvergenceError("etgbfry: mixture index exceeded cap", cum / total_, 1.0 - cum / total_);
}

double sample_etgbfry(const EtgBfryParams& p, RngStream& rng) { return EtgBfrySampler(p)(rng); }

EtgBfryParams etgbfry_conjugate_update(const EtgBfryParams& p, const Observation& obs) {
  p.validate(true);
  EtgBfryParams q = p;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PoissonObservation>) {
          require(o.lambda >= 0.0, "poisson likelihood: lambda must be >= 0");
          require(o.x >= 0.0 && o.x == std::floor(o.x), "poisson likelihood: X must be a nonnegative integer");
          q.sigma -= o.x;
          q.tau += o.lambda;
        } else if constexpr (std::is_same_v<T, GammaObservation>) {
          require(o.a >= 0.0, "gamma likelihood: shape must be >= 0");
          require(o.x >= 0.0, "gamma likelihood: X must be >= 0");
          q.sigma -= o.a;
          q.tau += o.x;
        } else if constexpr (std::is_same_v<T, NormalObservation>) {
          require(std::isfinite(o.mu) && std::isfinite(o.x), "normal likelihood: values must be finite");
          q.sigma -= 0.5;
          q.tau += 0.5 * (o.x - o.mu) * (o.x - o.mu);
        } else {
          require(o.x0 > 0.0 && o.x >= o.x0, "pareto likelihood: need X >= x0 > 0");
          q.sigma -= 1.0;
          q.tau += std::log(o.x / o.x0);
        }
      },
      obs);
  return q;
}

// ---------------------------------------------------------------------------
// igBFRY / etigBFRY

double sample_igbfry(double kappa, double sigma, RngStream& rng) {
  check_sigma(sigma, "igbfry");
  require(kappa > 0.0, "igbfry: kappa must be positive");
  const double g = sample_gamma(kappa + sigma, 1.0, rng);
  return std::exp(-std::log(g) - log_beta_sigma_one(sigma, rng));
}

double igbfry_pdf(double w, double kappa, double sigma) {
  check_sigma(sigma, "igbfry");
  require(kappa > 0.0, "igbfry: kappa must be positive");
  if (w <= 0.0) return 0.0;
  const double q = math::upper_incomplete_gamma(kappa, 1.0 / w);
  if (q == 0.0) return 0.0;
  return sigma * std::exp(-(1.0 + sigma) * std::log(w) + std::log(q) - math::log_gamma(kappa + sigma));
}

double etigbfry_unnormalized_pdf(double w, double kappa, double sigma, double t, double tau) {
  check_sigma(sigma, "etigbfry");
  require(kappa > 0.0 && t > 0.0 && tau >= 0.0, "etigbfry: need kappa > 0, t > 0, tau >= 0");
  if (w <= 0.0) return 0.0;
  const double q = math::upper_incomplete_gamma(kappa, 1.0 / (t * w));
  if (q == 0.0) return 0.0;
  return std::exp(-(1.0 + sigma) * std::log(w) - tau * w + std::log(q));
}

double etigbfry_normalizer(double kappa, double sigma, double t, double tau) {
  auto f = [&](double w) { return etigbfry_unnormalized_pdf(w, kappa, sigma, t, tau); };
  math::SemiaxisOptions opts;
  opts.scale = 1.0 / t;
  return math::integrate_semiaxis(f, {1e-12, 0.0, 200}, opts).value_or_throw("etigbfry normalizer");
}

EtigBfrySampler::EtigBfrySampler(double kappa, double sigma, double t, double tau)
    : kappa_(kappa), sigma_(sigma), t_(t), tau_(tau) {
  check_sigma(sigma, "etigbfry");
  require(kappa > 0.0 && t > 0.0 && tau >= 0.0, "etigbfry: need kappa > 0, t > 0, tau >= 0");
}

double EtigBfrySampler::operator()(RngStream& rng) {
  for (std::uint64_t tries = 0; tries < 100'000'000ULL; ++tries) {
    const double w = sample_igbfry(kappa_, sigma_, rng) / t_;
    ++proposals_;
    if (tau_ == 0.0 || rng.uniform() < std::exp(-tau_ * w)) {
      ++accepted_;
      return w;
    }
    if (!warned_ && proposals_ >= 1000 && acceptance_rate() < 1e-3) {
      warned_ = true;
      warn("etigbfry: rejection acceptance rate " + std::to_string(acceptance_rate()) + " is below 1e-3");
    }
  }
  throw ConvergenceError("etigbfry: rejection sampler stalled", 0.0, INFINITY);
}

double EtigBfrySampler::acceptance_rate() const {
  return proposals_ == 0 ? 1.0 : static_cast<double>(accepted_) / static_cast<double>(proposals_);
}

double sample_etigbfry(double kappa, double sigma, double t, double tau, RngStream& rng) {
  EtigBfrySampler s(kappa, sigma, t, tau);
  return s(rng);
}

}  // namespace crm::dist
