#include "crm/size_measures.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "crm/errors.hpp"
#include "crm/special_math.hpp"

namespace crm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

SizeMeasure SizeMeasure::ggp(double alpha, double sigma, double tau) {
  require(alpha > 0.0 && std::isfinite(alpha), "ggp: alpha must be positive");
  require(sigma < 1.0 && std::isfinite(sigma), "ggp: sigma must be < 1");
  require(tau >= 0.0 && std::isfinite(tau), "ggp: tau must be >= 0");
  require(sigma > 0.0 || tau > 0.0, "ggp: sigma <= 0 requires tau > 0");
  return SizeMeasure(ProcessFamily::GGP, alpha, sigma, tau, 0.0);
}

SizeMeasure SizeMeasure::stable(double alpha, double sigma) {
  require(alpha > 0.0 && std::isfinite(alpha), "stable: alpha must be positive");
  require(sigma > 0.0 && sigma < 1.0, "stable: sigma must lie in (0,1)");
  return SizeMeasure(ProcessFamily::Stable, alpha, sigma, 0.0, 0.0);
}

SizeMeasure SizeMeasure::gamma_process(double alpha, double tau) {
  require(alpha > 0.0 && std::isfinite(alpha), "gamma process: alpha must be positive");
  require(tau > 0.0 && std::isfinite(tau), "gamma process: tau must be positive");
  return SizeMeasure(ProcessFamily::GammaProcess, alpha, 0.0, tau, 0.0);
}

SizeMeasure SizeMeasure::sbp(double alpha, double sigma, double c) {
  require(alpha > 0.0 && std::isfinite(alpha), "sbp: alpha must be positive");
  // Only 0 < sigma < 1 is supported (the sigma <= 0 arrival-time formulas degenerate).
  require(sigma > 0.0 && sigma < 1.0, "sbp: sigma must lie in (0,1)");
  require(c > -sigma && std::isfinite(c), "sbp: c must exceed -sigma");
  return SizeMeasure(ProcessFamily::SBP, alpha, sigma, 0.0, c);
}

SizeMeasure SizeMeasure::beta_process(double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), "beta process: alpha must be positive");
  return SizeMeasure(ProcessFamily::BetaProcess, alpha, 0.0, 0.0, 1.0);
}

SizeMeasure SizeMeasure::transformed_bp(double alpha) {
  require(alpha > 0.0 && std::isfinite(alpha), "transformed beta process: alpha must be positive");
  return SizeMeasure(ProcessFamily::TransformedBP, alpha, 0.0, 0.0, 0.0);
}

bool SizeMeasure::is_ggp() const {
  return family_ == ProcessFamily::GGP || family_ == ProcessFamily::Stable || family_ == ProcessFamily::GammaProcess;
}

double SizeMeasure::upper_support() const {
  return (family_ == ProcessFamily::SBP || family_ == ProcessFamily::BetaProcess) ? 1.0 : kInf;
}

double SizeMeasure::log_norm() const {
  switch (family_) {
    case ProcessFamily::SBP:
      return std::log(alpha_) - math::log_beta(1.0 - sigma_, c_ + sigma_);
    case ProcessFamily::BetaProcess:
      return std::log(alpha_);
    case ProcessFamily::TransformedBP:
      return 0.0;
    default:
      return std::log(alpha_) - math::log_gamma(1.0 - sigma_);
  }
}

double SizeMeasure::log_density(double w) const {
  require(w > 0.0, "size measure: w must be positive");
  if (w >= upper_support()) return -kInf;
  const double lw = std::log(w);
  switch (family_) {
    case ProcessFamily::SBP:
      return log_norm() - (1.0 + sigma_) * lw + (c_ + sigma_ - 1.0) * std::log1p(-w);
    case ProcessFamily::BetaProcess:
      return log_norm() - lw;
    case ProcessFamily::TransformedBP:
      return -2.0 * lw;
    default:
      return log_norm() - (1.0 + sigma_) * lw - tau_ * w;
  }
}

double SizeMeasure::density(double w) const { return std::exp(log_density(w)); }

double SizeMeasure::tail_intensity(double x) const {
  require(x > 0.0, "tail_intensity: x must be positive");
  switch (family_) {
    case ProcessFamily::SBP:
      if (x >= 1.0) return 0.0;
      // int_x^1 w^{-1-s}(1-w)^{c+s-1} dw = B_{1-x}(c+s, -s)
      return std::exp(log_norm()) * math::incomplete_beta_complement(x, c_ + sigma_, -sigma_);
    case ProcessFamily::BetaProcess:
      return x >= 1.0 ? 0.0 : -alpha_ * std::log(x);
    case ProcessFamily::TransformedBP:
      return 1.0 / x;
    default:
      if (tau_ == 0.0) return alpha_ * std::pow(x, -sigma_) / (sigma_ * math::gamma_fn(1.0 - sigma_));
      return std::exp(log_norm() + sigma_ * std::log(tau_)) * math::upper_incomplete_gamma(-sigma_, tau_ * x);
  }
}

double SizeMeasure::total_mass() const {
  if (is_ggp() && sigma_ < 0.0) return alpha_ * std::pow(tau_, sigma_) / -sigma_;
  return kInf;
}

double SizeMeasure::inverse_tail(double y) const {
  require(y > 0.0 && std::isfinite(y), "inverse_tail: y must be positive");
  switch (family_) {
    case ProcessFamily::BetaProcess:
      return std::exp(-y / alpha_);
    case ProcessFamily::TransformedBP:
      return 1.0 / y;
    default:
      break;
  }
  if (is_ggp() && tau_ == 0.0) return std::pow(y * sigma_ * math::gamma_fn(1.0 - sigma_) / alpha_, -1.0 / sigma_);
  if (y >= total_mass()) return 0.0;

  // Solve rho-bar(1/s) = y for s, which is increasing in s.
  double guess;
  if (sigma_ > 0.0) {
    const double zeta0 = std::exp(log_norm());
    guess = std::pow(y * sigma_ / zeta0, 1.0 / sigma_);
  } else if (sigma_ == 0.0) {
    guess = tau_ * std::exp(std::min(y / alpha_, 600.0));
  } else {
    guess = tau_;
  }
  if (family_ == ProcessFamily::SBP) guess = std::max(guess, 2.0);
  auto g = [&](double s) { return tail_intensity(1.0 / s); };
  return 1.0 / math::invert_increasing(g, y, guess, {1e-13, 0.0, 400});
}

std::optional<RegularVariationData> SizeMeasure::regular_variation() const {
  if ((is_ggp() || family_ == ProcessFamily::SBP) && sigma_ > 0.0 && sigma_ < 1.0)
    return RegularVariationData{sigma_, std::exp(log_norm())};
  return std::nullopt;
}

double SizeMeasure::weight_from_point(double u) const {
  if (family_ == ProcessFamily::TransformedBP) return std::exp(-1.0 / (alpha_ * u));
  return u;
}

std::string SizeMeasure::family_name() const {
  switch (family_) {
    case ProcessFamily::GGP: return "ggp";
    case ProcessFamily::Stable: return "stable";
    case ProcessFamily::GammaProcess: return "gamma";
    case ProcessFamily::SBP: return "sbp";
    case ProcessFamily::BetaProcess: return "beta";
    case ProcessFamily::TransformedBP: return "transformed-beta";
  }
  return "?";
}

std::string SizeMeasure::name() const {
  const std::string a = "alpha=" + fmt(alpha_);
  switch (family_) {
    case ProcessFamily::GGP: return "ggp(" + a + ",sigma=" + fmt(sigma_) + ",tau=" + fmt(tau_) + ")";
    case ProcessFamily::Stable: return "stable(" + a + ",sigma=" + fmt(sigma_) + ")";
    case ProcessFamily::GammaProcess: return "gamma(" + a + ",tau=" + fmt(tau_) + ")";
    case ProcessFamily::SBP: return "sbp(" + a + ",sigma=" + fmt(sigma_) + ",c=" + fmt(c_) + ")";
    case ProcessFamily::BetaProcess: return "beta(" + a + ")";
    case ProcessFamily::TransformedBP: return "transformed-beta(" + a + ")";
  }
  return "?";
}

}  // namespace crm
