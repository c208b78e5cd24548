#include "crm/arrival_kernels.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "crm/distributions.hpp"
#include "crm/errors.hpp"
#include "crm/special_math.hpp"

namespace crm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ArrivalKernel ArrivalKernel::deterministic() { return {KernelFamily::Deterministic, 0.0}; }
ArrivalKernel ArrivalKernel::exponential() { return {KernelFamily::Exponential, 1.0}; }

ArrivalKernel ArrivalKernel::gamma(double kappa) {
  require(kappa >= 1.0 && std::isfinite(kappa), "gamma kernel: kappa must be >= 1");
  return {KernelFamily::Gamma, kappa};
}

ArrivalKernel ArrivalKernel::inverse_gamma(double kappa) {
  require(kappa >= 1.0 && std::isfinite(kappa), "inverse gamma kernel: kappa must be >= 1");
  return {KernelFamily::InverseGamma, kappa};
}

ArrivalKernel ArrivalKernel::generalized_pareto(double c) {
  require(c > 0.0 && std::isfinite(c), "pareto kernel: c must be positive");
  return {KernelFamily::GeneralizedPareto, c};
}

ArrivalKernel ArrivalKernel::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string head(spec.substr(0, colon));
  double param = std::numeric_limits<double>::quiet_NaN();
  if (colon != std::string_view::npos) {
    const std::string tail(spec.substr(colon + 1));
    std::size_t used = 0;
    try {
      param = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size()) throw ConfigError("kernel '" + std::string(spec) + "': bad parameter");
  }
  auto need_param = [&](const char* what) {
    if (std::isnan(param))
      throw ConfigError("kernel '" + std::string(spec) + "': expected " + what + ", e.g. " + head + ":2");
  };
  if (head == "deterministic" || head == "exponential") {
    if (!std::isnan(param)) throw ConfigError("kernel '" + head + "' takes no parameter");
    return head == "deterministic" ? deterministic() : exponential();
  }
  if (head == "gamma") return need_param("a shape"), gamma(param);
  if (head == "invgamma" || head == "inverse-gamma") return need_param("a shape"), inverse_gamma(param);
  if (head == "pareto") return need_param("an exponent"), generalized_pareto(param);
  throw ConfigError("unknown kernel '" + std::string(spec) +
                    "' (expected deterministic, exponential, gamma:K, invgamma:K or pareto:C)");
}

bool ArrivalKernel::is_exponential_like() const {
  return family_ == KernelFamily::Exponential || (family_ == KernelFamily::Gamma && param_ == 1.0);
}

double ArrivalKernel::kernel(double x) const {
  require(x >= 0.0, "kernel: x must be >= 0");
  switch (family_) {
    case KernelFamily::Deterministic: return x < 1.0 ? 1.0 : 0.0;
    case KernelFamily::Exponential: return std::exp(-x);
    case KernelFamily::Gamma: return math::gamma_q(param_, param_ * x);
    case KernelFamily::InverseGamma: return x == 0.0 ? 1.0 : math::gamma_p(param_, param_ / x);
    case KernelFamily::GeneralizedPareto: return std::exp(-param_ * std::log1p(x));
  }
  return 0.0;
}

double ArrivalKernel::kernel_derivative(double x) const {
  require(x >= 0.0, "kernel derivative: x must be >= 0");
  const double k = param_;
  switch (family_) {
    case KernelFamily::Deterministic:
      throw DomainError("deterministic kernel has no derivative");
    case KernelFamily::Exponential:
      return -std::exp(-x);
    case KernelFamily::Gamma:
      if (x == 0.0) return k == 1.0 ? -1.0 : 0.0;
      return -std::exp(k * std::log(k) + (k - 1.0) * std::log(x) - k * x - math::log_gamma(k));
    case KernelFamily::InverseGamma:
      if (x == 0.0) return 0.0;
      return -std::exp((k + 1.0) * std::log(k / x) - k / x - math::log_gamma(k + 1.0));
    case KernelFamily::GeneralizedPareto:
      return -k * std::exp(-(k + 1.0) * std::log1p(x));
  }
  return 0.0;
}

double ArrivalKernel::survival(double w, double t) const {
  require(w > 0.0 && t >= 0.0, "arrival kernel: need w > 0, t >= 0");
  if (family_ == KernelFamily::Deterministic) return t < 1.0 / w ? 1.0 : 0.0;
  return kernel(w * t);
}

double ArrivalKernel::cdf(double w, double t) const {
  require(w > 0.0 && t >= 0.0, "arrival kernel: need w > 0, t >= 0");
  const double x = w * t;
  switch (family_) {
    case KernelFamily::Deterministic: return t >= 1.0 / w ? 1.0 : 0.0;
    case KernelFamily::Exponential: return -std::expm1(-x);
    case KernelFamily::Gamma: return math::gamma_p(param_, param_ * x);
    case KernelFamily::InverseGamma: return x == 0.0 ? 0.0 : math::gamma_q(param_, param_ / x);
    case KernelFamily::GeneralizedPareto: return -std::expm1(-param_ * std::log1p(x));
  }
  return 0.0;
}

double ArrivalKernel::pdf(double w, double t) const {
  require(w > 0.0 && t >= 0.0, "arrival kernel: need w > 0, t >= 0");
  if (family_ == KernelFamily::Deterministic) throw DomainError("deterministic kernel has no density");
  return -w * kernel_derivative(w * t);
}

double ArrivalKernel::sample(double w, RngStream& rng) const {
  require(w > 0.0, "arrival kernel: w must be positive");
  switch (family_) {
    case KernelFamily::Deterministic: return 1.0 / w;
    case KernelFamily::Exponential: return dist::sample_exponential(1.0, rng) / w;
    case KernelFamily::Gamma: return dist::sample_gamma(param_, param_ * w, rng);
    case KernelFamily::InverseGamma: return param_ / (w * dist::sample_gamma(param_, 1.0, rng));
    case KernelFamily::GeneralizedPareto: return std::expm1(-std::log(rng.uniform()) / param_) / w;
  }
  return 0.0;
}

double ArrivalKernel::sample_truncated(double w, double t_max, RngStream& rng) const {
  require(w > 0.0 && t_max > 0.0, "arrival kernel: need w > 0, t_max > 0");
  if (family_ == KernelFamily::Deterministic) {
    require(1.0 / w <= t_max, "deterministic kernel: arrival 1/w lies beyond the truncation");
    return 1.0 / w;
  }
  const double p = rng.uniform() * cdf(w, t_max);
  switch (family_) {
    case KernelFamily::Exponential: return -std::log1p(-p) / w;
    case KernelFamily::Gamma: return boost::math::gamma_p_inv(param_, p) / (param_ * w);
    case KernelFamily::InverseGamma: return param_ / (w * boost::math::gamma_q_inv(param_, p));
    case KernelFamily::GeneralizedPareto: return std::expm1(-std::log1p(-p) / param_) / w;
    default: return 0.0;
  }
}

MellinStrip ArrivalKernel::mellin_strip() const {
  switch (family_) {
    case KernelFamily::InverseGamma: return {-param_, 0.0};
    case KernelFamily::GeneralizedPareto: return {-param_, 0.0};
    default: return {-kInf, 0.0};
  }
}

MellinStrip ArrivalKernel::mellin_prime_strip() const {
  switch (family_) {
    case KernelFamily::Deterministic: throw DomainError("deterministic kernel has no derivative transform");
    case KernelFamily::Exponential: return {-kInf, 0.0};
    case KernelFamily::Gamma: return {-kInf, param_ - 1.0};
    case KernelFamily::InverseGamma: return {-param_ - 1.0, kInf};
    case KernelFamily::GeneralizedPareto: return {-param_ - 1.0, 0.0};
  }
  return {0.0, 0.0};
}

double ArrivalKernel::mellin_k(double z) const {
  if (!mellin_strip().contains(z))
    throw DomainError("mellin_k: z=" + fmt(z) + " outside the convergence strip of " + name());
  const double k = param_;
  switch (family_) {
    case KernelFamily::Deterministic:
      return -1.0 / z;
    case KernelFamily::Exponential:
      return math::gamma_fn(-z);
    case KernelFamily::Gamma:
      return -std::exp(math::log_gamma(k - z) + z * std::log(k) - math::log_gamma(k)) / z;
    case KernelFamily::InverseGamma:
      return -std::exp(math::log_gamma(k + z) - z * std::log(k) - math::log_gamma(k)) / z;
    case KernelFamily::GeneralizedPareto:
      return math::beta_fn(-z, k + z);
  }
  return 0.0;
}

double ArrivalKernel::mellin_kprime(double z) const {
  if (!mellin_prime_strip().contains(z))
    throw DomainError("mellin_kprime: z=" + fmt(z) + " outside the convergence strip of " + name());
  const double k = param_;
  switch (family_) {
    case KernelFamily::Exponential:
      return -math::gamma_fn(-z);
    case KernelFamily::Gamma:
      return -std::exp((z + 1.0) * std::log(k) + math::log_gamma(k - z - 1.0) - math::log_gamma(k));
    case KernelFamily::InverseGamma:
      return -std::exp(-(z + 1.0) * std::log(k) + math::log_gamma(z + k + 1.0) - math::log_gamma(k));
    case KernelFamily::GeneralizedPareto:
      return -k * math::beta_fn(-z, k + 1.0 + z);
    default:
      return 0.0;
  }
}

void ArrivalKernel::check_c1_conditions(double sigma) const {
  require(sigma > 0.0 && sigma < 1.0, "C1: sigma must lie in (0,1)");
  if (family_ == KernelFamily::InverseGamma)
    require(param_ > 2.0 - sigma, "C1: inverse gamma kernel needs kappa > 2 - sigma (got kappa=" + fmt(param_) +
                                      ", sigma=" + fmt(sigma) + "); the error variance is infinite otherwise");
  if (family_ == KernelFamily::GeneralizedPareto)
    require(param_ > 2.0 - sigma, "C1: pareto kernel needs c > 2 - sigma (got c=" + fmt(param_) +
                                      ", sigma=" + fmt(sigma) + ")");
}

double ArrivalKernel::c1_constant(double sigma) const {
  check_c1_conditions(sigma);
  const double s = sigma, k = param_;
  switch (family_) {
    case KernelFamily::Deterministic:
      return 1.0 / (1.0 - s);
    case KernelFamily::Exponential:
      return std::exp(math::log_gamma(1.0 - s) / s);
    case KernelFamily::Gamma:
      return (k - s) * std::exp((math::log_gamma(k - s) - math::log_gamma(k)) / s) / (1.0 - s);
    case KernelFamily::InverseGamma:
      return std::exp((math::log_gamma(k + s) - math::log_gamma(k)) / s) / ((1.0 - s) * (k + s - 1.0));
    case KernelFamily::GeneralizedPareto:
      return math::beta_fn(1.0 - s, k + s - 1.0) / std::pow(k * math::beta_fn(1.0 - s, k + s), 1.0 - 1.0 / s);
  }
  return 0.0;
}

double ArrivalKernel::c1_generic(double sigma) const {
  check_c1_conditions(sigma);
  if (family_ == KernelFamily::Deterministic) return 1.0 / (1.0 - sigma);
  return mellin_k(sigma - 1.0) / std::pow(-mellin_kprime(sigma - 1.0), 1.0 - 1.0 / sigma);
}

double ArrivalKernel::tail_exponent() const {
  if (family_ == KernelFamily::InverseGamma || family_ == KernelFamily::GeneralizedPareto) return param_;
  return kInf;
}

std::string ArrivalKernel::name() const {
  switch (family_) {
    case KernelFamily::Deterministic: return "deterministic";
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::Gamma: return "gamma:" + fmt(param_);
    case KernelFamily::InverseGamma: return "invgamma:" + fmt(param_);
    case KernelFamily::GeneralizedPareto: return "pareto:" + fmt(param_);
  }
  return "?";
}

}  // namespace crm
