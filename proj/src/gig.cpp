#include <cmath>

#include "crm/distributions.hpp"
#include "crm/errors.hpp"
#include "crm/special_math.hpp"

namespace crm::dist {
namespace {

void check_gig(double p, double a, double b) {
  if (!std::isfinite(p) || !(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("gig: need finite p, a > 0, b > 0");
}

}  // namespace

double gig_log_normalizer(double p, double a, double b) {
  check_gig(p, a, b);
  return std::log(2.0) + 0.5 * p * std::log(b / a) + math::log_bessel_k(p, std::sqrt(a * b));
}

double gig_pdf(double w, double p, double a, double b) {
  check_gig(p, a, b);
  if (w <= 0.0) return 0.0;
  return std::exp((p - 1.0) * std::log(w) - 0.5 * (a * w + b / w) - gig_log_normalizer(p, a, b));
}

// Y = log W has the strictly concave log density h(y) = p y - (a e^y + b e^{-y}) / 2.
// Envelope: flat at the mode value on [yl, yr] (where h has dropped by one),
// exponential tangents beyond. Acceptance is at least 1/(e+1)-ish for any (p,a,b).
GigSampler::GigSampler(double p, double a, double b) : p_(p), a_(a), b_(b) {
  check_gig(p, a, b);
  const double root = std::sqrt(p * p + a * b);
  const double xm = p >= 0.0 ? (p + root) / a : b / (root - p);
  ym_ = std::log(xm);
  hm_ = h(ym_);
  const double curvature = 0.5 * (a * xm + b / xm);
  const double step0 = 1.0 / std::sqrt(curvature);

  auto find_edge = [&](double dir) {
    double inner = ym_, step = step0, outer = ym_ + dir * step;
    while (h(outer) > hm_ - 1.0) {
      inner = outer;
      step *= 2.0;
      outer = ym_ + dir * step;
    }
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (inner + outer);
      (h(mid) > hm_ - 1.0 ? inner : outer) = mid;
    }
    return outer;
  };
  yl_ = find_edge(-1.0);
  yr_ = find_edge(+1.0);
  sl_ = dh(yl_);
  sr_ = dh(yr_);
  // Masses relative to e^{hm}.
  mass_mid_ = yr_ - yl_;
  mass_left_ = std::exp(h(yl_) - hm_) / sl_;
  mass_right_ = std::exp(h(yr_) - hm_) / -sr_;
}

double GigSampler::h(double y) const { return p_ * y - 0.5 * (a_ * std::exp(y) + b_ * std::exp(-y)); }
double GigSampler::dh(double y) const { return p_ - 0.5 * (a_ * std::exp(y) - b_ * std::exp(-y)); }

double GigSampler::operator()(RngStream& rng) const {
  const double total = mass_left_ + mass_mid_ + mass_right_;
  for (int tries = 0; tries < 1'000'000; ++tries) {
    const double u = rng.uniform() * total;
    double y, log_env;
    if (u < mass_left_) {
      y = yl_ + std::log(rng.uniform()) / sl_;
      log_env = h(yl_) + sl_ * (y - yl_);
    } else if (u < mass_left_ + mass_mid_) {
      y = yl_ + rng.uniform() * mass_mid_;
      log_env = hm_;
    } else {
      y = yr_ + std::log(rng.uniform()) / sr_;
      log_env = h(yr_) + sr_ * (y - yr_);
    }
    if (std::log(rng.uniform()) <= h(y) - log_env) return std::exp(y);
  }
  throw ConvergenceError("gig: rejection sampler stalled", std::exp(ym_), INFINITY);
}

double sample_gig(double p, double a, double b, RngStream& rng) { return GigSampler(p, a, b)(rng); }

}  // namespace crm::dist
