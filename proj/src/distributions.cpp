#include "crm/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "crm/errors.hpp"
#include "crm/special_math.hpp"

namespace crm::dist {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

double sample_uniform(RngStream& rng) { return rng.uniform(); }

double sample_exponential(double rate, RngStream& rng) {
  require(rate > 0.0 && std::isfinite(rate), "exponential: rate must be positive");
  return -std::log(rng.uniform()) / rate;
}

double sample_normal(double mean, double sd, RngStream& rng) {
  require(sd > 0.0, "normal: sd must be positive");
  const double u1 = rng.uniform(), u2 = rng.uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  require(shape > 0.0 && std::isfinite(shape), "gamma: shape must be positive");
  require(rate > 0.0 && std::isfinite(rate), "gamma: rate must be positive");
  if (shape == 1.0) return sample_exponential(rate, rng);
  // Marsaglia-Tsang; shapes below one are boosted by one and corrected with U^{1/shape}.
  const bool boost = shape < 1.0;
  const double d = (boost ? shape + 1.0 : shape) - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double g;
  for (;;) {
    const double x = sample_normal(0.0, 1.0, rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x || std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      g = d * v;
      break;
    }
  }
  if (boost) return std::exp(std::log(g) + std::log(rng.uniform()) / shape) / rate;
  return g / rate;
}

double sample_beta(double a, double b, RngStream& rng) {
  require(a > 0.0 && b > 0.0, "beta: parameters must be positive");
  if (b == 1.0) return std::exp(std::log(rng.uniform()) / a);
  if (a == 1.0) return -std::expm1(std::log(rng.uniform()) / b);
  const double x = sample_gamma(a, 1.0, rng);
  const double y = sample_gamma(b, 1.0, rng);
  return x / (x + y);
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  require(scale > 0.0, "inverse gamma: scale must be positive");
  return scale / sample_gamma(shape, 1.0, rng);
}

double exponential_pdf(double x, double rate) {
  require(rate > 0.0, "exponential: rate must be positive");
  return x < 0.0 ? 0.0 : rate * std::exp(-rate * x);
}

double gamma_log_pdf(double x, double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, "gamma: parameters must be positive");
  if (x <= 0.0) return -INFINITY;
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - math::log_gamma(shape);
}

double gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) {
    require(shape > 0.0 && rate > 0.0, "gamma: parameters must be positive");
    return 0.0;
  }
  return std::exp(gamma_log_pdf(x, shape, rate));
}

double beta_pdf(double x, double a, double b) {
  require(a > 0.0 && b > 0.0, "beta: parameters must be positive");
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - math::log_beta(a, b));
}

double inverse_gamma_pdf(double x, double shape, double scale) {
  require(shape > 0.0 && scale > 0.0, "inverse gamma: parameters must be positive");
  if (x <= 0.0) return 0.0;
  return std::exp(shape * std::log(scale) - (shape + 1.0) * std::log(x) - scale / x - math::log_gamma(shape));
}

double normal_log_pdf(double x, double mean, double sd) {
  require(sd > 0.0, "normal: sd must be positive");
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace crm::dist
