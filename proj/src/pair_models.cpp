#include "pair_models.hpp"

#include <cmath>
#include <limits>

#include "crm/distributions.hpp"
#include "crm/errors.hpp"
#include "crm/special_math.hpp"

namespace crm::detail {
namespace {

constexpr math::Tolerance kPsiTol{1e-11, 0.0, 200};

std::string pair_label(const SizeMeasure& m, const ArrivalKernel& k) { return m.name() + " x " + k.name(); }

}  // namespace

std::optional<double> leading_coefficient(const SizeMeasure& m, const ArrivalKernel& k) {
  const auto rv = m.regular_variation();
  if (!rv) return std::nullopt;
  const double s = rv->sigma;
  if (k.is_atomic()) return rv->zeta0 / s;
  if (!k.mellin_prime_strip().contains(s - 1.0)) return std::nullopt;
  return -k.mellin_kprime(s - 1.0) * rv->zeta0 / s;
}

double PairModel::numeric_Psi(double t) const {
  if (!(t > 0.0)) return 0.0;
  math::SemiaxisOptions opts;
  // Exponential tilting caps where the mass can sit, whatever t is.
  opts.scale = m.tau() > 0.0 ? std::min(1.0 / t, 1.0 / m.tau()) : 1.0 / t;
  if (std::isfinite(m.upper_support())) opts.breakpoints.push_back(m.upper_support());
  if (k.is_atomic()) opts.breakpoints.push_back(1.0 / t);
  auto f = [&](double w) {
    // Log space: w^{-1-sigma} overflows at subnormal w where the kernel is tiny.
    const double lam = k.cdf(w, t);
    return lam == 0.0 ? 0.0 : std::exp(std::log(lam) + m.log_density(w));
  };
  return math::integrate_semiaxis(f, kPsiTol, opts).value_or_throw("Psi quadrature did not converge");
}

double PairModel::numeric_psi(double t) const {
  if (!(t > 0.0)) throw DomainError("psi: t must be positive");
  if (k.is_atomic()) return m.density(1.0 / t) / (t * t);
  math::SemiaxisOptions opts;
  // Exponential tilting caps where the mass can sit, whatever t is.
  opts.scale = m.tau() > 0.0 ? std::min(1.0 / t, 1.0 / m.tau()) : 1.0 / t;
  if (std::isfinite(m.upper_support())) opts.breakpoints.push_back(m.upper_support());
  auto f = [&](double w) {
    const double lam = k.pdf(w, t);
    return lam == 0.0 ? 0.0 : std::exp(std::log(lam) + m.log_density(w));
  };
  return math::integrate_semiaxis(f, kPsiTol, opts).value_or_throw("psi quadrature did not converge");
}

double PairModel::inverse_guess(double xi) const {
  if (auto c = leading_coefficient(m, k)) return std::pow(xi / *c, 1.0 / m.sigma());
  return 1.0;
}

double PairModel::sample_phi(double, RngStream&) const {
  throw UnsupportedPair("no sampler for W | T = t is available for " + pair_label(m, k));
}

WeightSampler PairModel::phibar(double) const {
  throw UnsupportedPair("no sampler for W | T <= t is available for " + pair_label(m, k));
}

PairCatalogEntry PairModel::describe() const {
  return {m.family_name(), k.name(), false, false, false, false, false, "numeric Psi and psi by quadrature only"};
}

namespace {

// GGP family with exponential arrivals (size-biased construction).
class GgpExponential final : public PairModel {
 public:
  using PairModel::PairModel;
  double Psi(double t) const override {
    const double a = m.alpha(), s = m.sigma(), tau = m.tau();
    if (s == 0.0) return a * std::log1p(t / tau);
    if (tau == 0.0) return a / s * std::pow(t, s);
    return a / s * std::pow(tau, s) * std::expm1(s * std::log1p(t / tau));
  }
  double psi(double t) const override { return m.alpha() * std::pow(t + m.tau(), m.sigma() - 1.0); }
  std::optional<double> Psi_inverse(double xi) const override {
    const double a = m.alpha(), s = m.sigma(), tau = m.tau();
    if (s == 0.0) return tau * std::expm1(xi / a);
    if (tau == 0.0) return std::pow(s * xi / a, 1.0 / s);
    const double z = s * xi / (a * std::pow(tau, s));
    if (z <= -1.0) throw DomainError("Psi^{-1}: xi exceeds the total mass of a finite-activity GGP");
    return tau * std::expm1(std::log1p(z) / s);
  }
  double sample_phi(double t, RngStream& rng) const override {
    return dist::sample_gamma(1.0 - m.sigma(), t + m.tau(), rng);
  }
  WeightSampler phibar(double t) const override {
    const double s = m.sigma(), tau = m.tau();
    if (s > 0.0) return [=](RngStream& rng) { return dist::sample_etbfry(s, t, tau, rng); };
    // W = G / S with S^s uniform between tau^s and (t+tau)^s (log-uniform when s = 0).
    return [=](RngStream& rng) {
      const double g = dist::sample_gamma(1.0 - s, 1.0, rng);
      const double u = rng.uniform();
      double rate;
      if (s == 0.0)
        rate = tau * std::exp(u * std::log1p(t / tau));
      else
        rate = std::pow(std::pow(t + tau, s) * (1.0 - u) + std::pow(tau, s) * u, 1.0 / s);
      return g / rate;
    };
  }
  PairCatalogEntry describe() const override {
    return {m.family_name(), k.name(), true, true, true, true, m.sigma() >= 0.0,
            "W|T=t ~ Gamma(1-sigma, t+tau); W|T<=t ~ exponentially tilted BFRY"};
  }
};

// GGP family with Gamma(kappa) arrivals, kappa > 1.
class GgpGamma final : public PairModel {
 public:
  GgpGamma(const SizeMeasure& m, const ArrivalKernel& k) : PairModel(m, k) {
    const double s = m.sigma(), kap = k.kappa();
    eta_ = std::exp(std::log(m.alpha()) + s * std::log(kap) + math::log_gamma(kap - s) - math::log_gamma(kap) -
                    math::log_gamma(1.0 - s));
  }
  double Psi(double t) const override {
    const double s = m.sigma(), kap = k.kappa(), tau = m.tau();
    if (t <= 0.0) return 0.0;
    if (tau == 0.0) return eta_ * std::pow(t, s) / s;
    const double y = tau / (kap * t + tau);
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    const double b = y < 0.5 ? math::incomplete_beta_complement(y, kap, -s) : math::incomplete_beta(kap * t / (kap * t + tau), kap, -s);
    return eta_ * std::pow(tau / kap, s) * b;
  }
  double psi(double t) const override {
    const double s = m.sigma(), kap = k.kappa();
    return eta_ * std::exp((kap - 1.0) * std::log(t) + (s - kap) * std::log(t + m.tau() / kap));
  }
  std::optional<double> Psi_inverse(double xi) const override {
    if (m.tau() == 0.0) return std::pow(m.sigma() * xi / eta_, 1.0 / m.sigma());
    return std::nullopt;
  }
  double inverse_guess(double xi) const override {
    const double s = m.sigma();
    if (s > 0.0) return std::pow(s * xi / eta_, 1.0 / s);
    return m.tau() / k.kappa() * std::exp(std::min(xi / eta_, 600.0));
  }
  double sample_phi(double t, RngStream& rng) const override {
    return dist::sample_gamma(k.kappa() - m.sigma(), k.kappa() * t + m.tau(), rng);
  }
  WeightSampler phibar(double t) const override {
    auto sampler = std::make_shared<dist::EtgBfrySampler>(dist::EtgBfryParams{k.kappa(), m.sigma(), k.kappa() * t, m.tau()});
    return [sampler](RngStream& rng) { return (*sampler)(rng); };
  }
  PairCatalogEntry describe() const override {
    return {m.family_name(), k.name(), true, m.tau() == 0.0, true, true, true,
            "Psi via incomplete beta; W|T=t ~ Gamma(kappa-sigma, kappa t+tau); W|T<=t ~ etgBFRY(kappa, sigma, kappa t, tau)"};
  }

 private:
  double eta_;
};

// GGP family with inverse-gamma arrivals.
class GgpInverseGamma final : public PairModel {
 public:
  GgpInverseGamma(const SizeMeasure& m, const ArrivalKernel& k) : PairModel(m, k) {
    const double s = m.sigma(), kap = k.kappa();
    if (m.tau() == 0.0)
      stable_c_ = std::exp(std::log(m.alpha()) + math::log_gamma(kap + s) - std::log(s) - s * std::log(kap) -
                           math::log_gamma(1.0 - s) - math::log_gamma(kap));
  }
  double Psi(double t) const override {
    const double s = m.sigma(), tau = m.tau();
    if (t <= 0.0) return 0.0;
    if (tau == 0.0) return stable_c_ * std::pow(t, s);
    if (k.kappa() == 1.0) {
      return std::exp(std::log(2.0 * m.alpha()) + 0.5 * s * std::log(tau * t) +
                      math::log_bessel_k(s, 2.0 * std::sqrt(tau / t)) - math::log_gamma(1.0 - s));
    }
    return numeric_Psi(t);
  }
  double psi(double t) const override {
    const double s = m.sigma(), tau = m.tau(), kap = k.kappa();
    if (tau == 0.0) return s * stable_c_ * std::pow(t, s - 1.0);
    return std::exp(std::log(2.0 * m.alpha()) + kap * std::log(kap) - (kap + 1.0) * std::log(t) +
                    0.5 * (kap + s) * std::log(t * tau / kap) + math::log_bessel_k(kap + s, 2.0 * std::sqrt(kap * tau / t)) -
                    math::log_gamma(kap) - math::log_gamma(1.0 - s));
  }
  std::optional<double> Psi_inverse(double xi) const override {
    if (m.tau() == 0.0) return std::pow(xi / stable_c_, 1.0 / m.sigma());
    return std::nullopt;
  }
  double sample_phi(double t, RngStream& rng) const override {
    const double s = m.sigma(), kap = k.kappa();
    if (m.tau() == 0.0) return dist::sample_inverse_gamma(kap + s, kap / t, rng);
    return dist::GigSampler(-kap - s, 2.0 * m.tau(), 2.0 * kap / t)(rng);
  }
  WeightSampler phibar(double t) const override {
    const double s = m.sigma(), kap = k.kappa(), tau = m.tau();
    if (tau == 0.0) return [=](RngStream& rng) { return kap / t * dist::sample_igbfry(kap, s, rng); };
    if (kap == 1.0) {
      auto g = std::make_shared<dist::GigSampler>(-s, 2.0 * tau, 2.0 / t);
      return [g](RngStream& rng) { return (*g)(rng); };
    }
    if (s > 0.0) {
      auto e = std::make_shared<dist::EtigBfrySampler>(kap, s, t / kap, tau);
      return [e](RngStream& rng) { return (*e)(rng); };
    }
    return PairModel::phibar(t);
  }
  PairCatalogEntry describe() const override {
    const bool stable = m.tau() == 0.0, one = k.kappa() == 1.0;
    return {m.family_name(), k.name(), stable || one, stable, true, true, stable || one || m.sigma() > 0.0,
            stable ? "W|T=t ~ InvGamma(kappa+sigma, kappa/t); W|T<=t ~ (kappa/t) igBFRY"
                   : "W|T=t ~ GIG(-kappa-sigma, 2tau, 2kappa/t); W|T<=t ~ GIG (kappa=1) or etigBFRY by rejection"};
  }

 private:
  double stable_c_ = 0.0;
};

// Stable process with generalized Pareto arrivals: t W | T=t is beta-prime.
class StablePareto final : public PairModel {
 public:
  StablePareto(const SizeMeasure& m, const ArrivalKernel& k) : PairModel(m, k) {
    const double s = m.sigma(), c = k.c();
    coef_ = m.regular_variation()->zeta0 * c / s * math::beta_fn(1.0 - s, c + s);
  }
  double Psi(double t) const override { return coef_ * std::pow(t, m.sigma()); }
  double psi(double t) const override { return m.sigma() * coef_ * std::pow(t, m.sigma() - 1.0); }
  std::optional<double> Psi_inverse(double xi) const override { return std::pow(xi / coef_, 1.0 / m.sigma()); }
  double sample_phi(double t, RngStream& rng) const override {
    const double g1 = dist::sample_gamma(1.0 - m.sigma(), 1.0, rng);
    const double g2 = dist::sample_gamma(k.c() + m.sigma(), 1.0, rng);
    return g1 / g2 / t;
  }
  WeightSampler phibar(double t) const override {
    const double s = m.sigma(), c = k.c();
    return [=](RngStream& rng) {
      const double z = dist::sample_bfry(s, rng);
      return z / (dist::sample_gamma(c + s, 1.0, rng) * t);
    };
  }
  PairCatalogEntry describe() const override {
    return {m.family_name(), k.name(), true, true, true, true, true,
            "t W|T=t ~ BetaPrime(1-sigma, c+sigma); t W|T<=t ~ BFRY(sigma)/Gamma(c+sigma)"};
  }

 private:
  double coef_;
};

// Stable beta process with Pareto arrivals sharing the exponent c.
class SbpPareto final : public PairModel {
 public:
  using PairModel::PairModel;
  double Psi(double t) const override {
    const double s = m.sigma();
    return m.alpha() * m.c() / s * std::expm1(s * std::log1p(t));
  }
  double psi(double t) const override { return m.alpha() * m.c() * std::pow(t + 1.0, m.sigma() - 1.0); }
  std::optional<double> Psi_inverse(double xi) const override {
    const double s = m.sigma();
    return std::expm1(std::log1p(s * xi / (m.alpha() * m.c())) / s);
  }
  double sample_phi(double t, RngStream& rng) const override {
    const double z = dist::sample_gamma(1.0 - m.sigma(), 1.0 + t, rng);
    const double y = dist::sample_gamma(m.c() + m.sigma(), 1.0, rng);
    const double r = z / y;
    return r / (1.0 + r);
  }
  WeightSampler phibar(double t) const override {
    const double s = m.sigma(), c = m.c();
    return [=](RngStream& rng) {
      const double z = dist::sample_etbfry(s, t, 1.0, rng);
      const double r = z / dist::sample_gamma(c + s, 1.0, rng);
      return r / (1.0 + r);
    };
  }
  PairCatalogEntry describe() const override {
    return {m.family_name(), k.name(), true, true, true, true, true,
            "W = R/(1+R) with R a ratio of a (tilted) gamma/etBFRY and Gamma(c+sigma) variable"};
  }
};

// Deterministic arrivals T = 1/W (inverse Levy construction) for any process.
class DeterministicModel final : public PairModel {
 public:
  using PairModel::PairModel;
  double Psi(double t) const override { return t <= 0.0 ? 0.0 : m.tail_intensity(1.0 / t); }
  double psi(double t) const override {
    const double w = 1.0 / t;
    return w >= m.upper_support() ? 0.0 : m.density(w) * w * w;
  }
  std::optional<double> Psi_inverse(double xi) const override { return 1.0 / m.inverse_tail(xi); }
  double sample_phi(double t, RngStream&) const override { return 1.0 / t; }
  WeightSampler phibar(double t) const override {
    const double y0 = Psi(t);
    const SizeMeasure mm = m;
    return [mm, y0](RngStream& rng) { return mm.inverse_tail(rng.uniform() * y0); };
  }
  PairCatalogEntry describe() const override {
    const bool closed = m.family() == ProcessFamily::Stable || m.family() == ProcessFamily::BetaProcess ||
                        m.family() == ProcessFamily::TransformedBP || (m.is_ggp() && m.tau() == 0.0);
    return {m.family_name(), k.name(), true, closed, true, true, true,
            "Psi(t) = tail(1/t); W = tail^{-1}(xi); W|T<=t = tail^{-1}(U tail(1/t))"};
  }
};

// Transformed beta process (rho(du) = u^{-2} du) with InvGamma(1) arrivals: Psi(t) = t.
class TransformedBpInvGamma final : public PairModel {
 public:
  using PairModel::PairModel;
  double Psi(double t) const override { return t; }
  double psi(double) const override { return 1.0; }
  std::optional<double> Psi_inverse(double xi) const override { return xi; }
  double sample_phi(double t, RngStream& rng) const override { return dist::sample_inverse_gamma(2.0, 1.0 / t, rng); }
  WeightSampler phibar(double t) const override {
    return [t](RngStream& rng) { return dist::sample_inverse_gamma(1.0, 1.0 / t, rng); };
  }
  PairCatalogEntry describe() const override {
    return {m.family_name(), k.name(), true, true, true, true, true,
            "Psi(t) = t; U|T=t ~ InvGamma(2, 1/t); U|T<=t ~ InvGamma(1, 1/t); W = exp(-1/(alpha U))"};
  }
};

}  // namespace

std::shared_ptr<const PairModel> make_pair_model(const SizeMeasure& m, const ArrivalKernel& k) {
  if (k.is_atomic()) return std::make_shared<DeterministicModel>(m, k);
  if (m.is_ggp()) {
    if (k.is_exponential_like()) return std::make_shared<GgpExponential>(m, k);
    if (k.family() == KernelFamily::Gamma) return std::make_shared<GgpGamma>(m, k);
    if (k.family() == KernelFamily::InverseGamma) return std::make_shared<GgpInverseGamma>(m, k);
    if (k.family() == KernelFamily::GeneralizedPareto && m.tau() == 0.0 && m.sigma() > 0.0)
      return std::make_shared<StablePareto>(m, k);
  }
  if (m.family() == ProcessFamily::SBP && k.family() == KernelFamily::GeneralizedPareto && k.c() == m.c())
    return std::make_shared<SbpPareto>(m, k);
  if (m.family() == ProcessFamily::TransformedBP && k.family() == KernelFamily::InverseGamma && k.kappa() == 1.0)
    return std::make_shared<TransformedBpInvGamma>(m, k);
  return std::make_shared<PairModel>(m, k);
}

}  // namespace crm::detail
