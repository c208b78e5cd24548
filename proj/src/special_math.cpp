#include "crm/special_math.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <limits>
#include <string>

#include "crm/errors.hpp"

namespace crm::math {

namespace bm = boost::math;

void Tolerance::validate() const {
  if (!(rel > 0.0)) throw DomainError("tolerance: rel must be > 0");
  if (!(abs >= 0.0)) throw DomainError("tolerance: abs must be >= 0");
  if (max_iter < 1) throw DomainError("tolerance: max_iter must be >= 1");
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: x must be > 0, got " + std::to_string(x));
  return bm::lgamma(x);
}

double gamma_fn(double x) {
  if (!std::isfinite(x) || (x <= 0.0 && x == std::floor(x)))
    throw DomainError("gamma_fn: pole or non-finite argument " + std::to_string(x));
  return bm::tgamma(x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("log_beta: a, b must be > 0");
  return bm::lgamma(a) + bm::lgamma(b) - bm::lgamma(a + b);
}

double beta_fn(double a, double b) { return std::exp(log_beta(a, b)); }

double lower_incomplete_gamma(double a, double x, bool regularized) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("lower_incomplete_gamma: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return regularized ? 1.0 : bm::tgamma(a);
  return regularized ? bm::gamma_p(a, x) : bm::tgamma_lower(a, x);
}

double gamma_p(double a, double x) { return lower_incomplete_gamma(a, x, true); }

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw DomainError("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return bm::gamma_q(a, x);
}

namespace {

// Modified Lentz evaluation of the Legendre continued fraction; good for x >~ 1.
double upper_gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 3.0 * std::numeric_limits<double>::epsilon();
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return std::exp(-x + a * std::log(x)) * h;
  }
  throw ConvergenceError("upper_incomplete_gamma: continued fraction failed", std::exp(-x + a * std::log(x)) * h,
                         std::numeric_limits<double>::infinity());
}

// Downward recurrence Gamma(s-1,x) = (Gamma(s,x) - x^{s-1} e^{-x}) / (s-1),
// started from a shape in (0,1] (Boost) or from E1 when a is an integer.
double upper_gamma_recurrence(double a, double x) {
  const int steps = static_cast<int>(std::ceil(-a));
  const double a0 = a + steps;
  long double g = (a0 == 0.0) ? bm::expint(1, x) : bm::tgamma(a0, x);
  const long double ex = std::exp(-static_cast<long double>(x));
  const long double lx = std::log(static_cast<long double>(x));
  double s = a0;
  for (int k = 0; k < steps; ++k) {
    g = (g - std::exp((s - 1.0) * lx) * ex) / (s - 1.0);
    s -= 1.0;
  }
  return static_cast<double>(g);
}

}  // namespace

double upper_incomplete_gamma(double a, double x) {
  if (!(x > 0.0)) throw DomainError("upper_incomplete_gamma: x must be > 0");
  if (!std::isfinite(a)) throw DomainError("upper_incomplete_gamma: a must be finite");
  if (std::isinf(x)) return 0.0;
  if (a > 0.0) return bm::tgamma(a, x);
  if (x >= 1.0) return upper_gamma_cf(a, x);
  return upper_gamma_recurrence(a, x);
}

namespace {

// B_x(a, b) with both x and y = 1 - x supplied, so callers near x = 1 keep
// the digits of the complement.
double incomplete_beta_xy(double x, double y, double a, double b) {
  if (!(x > 0.0 && y > 0.0 && x <= 1.0 && y <= 1.0)) throw DomainError("incomplete_beta: x must lie in (0,1)");
  if (!(a > 0.0)) throw DomainError("incomplete_beta: a must be > 0");
  if (!std::isfinite(b)) throw DomainError("incomplete_beta: b must be finite");
  if (b > 0.0) return x <= 0.5 ? bm::beta(a, b, x) : bm::beta(a, b) - bm::beta(b, a, y);

  // b <= 0: direct quadrature. Left piece with s = u^a removes the u^{a-1}
  // factor; right piece with 1-u = e^{-v} keeps (1-u)^{b-1} well scaled.
  Tolerance tol{1e-13, 0.0, 200};
  const double x1 = std::min(x, 0.5);
  const double inv_a = 1.0 / a;
  auto left = [&](double s) { return std::pow(1.0 - std::pow(s, inv_a), b - 1.0); };
  double value = integrate_interval(left, 0.0, std::pow(x1, a), tol).value_or_throw("incomplete_beta") * inv_a;
  if (x > 0.5) {
    auto right = [&](double v) { return std::pow(-std::expm1(-v), a - 1.0) * std::exp(-b * v); };
    value += integrate_interval(right, std::log(2.0), -std::log(y), tol).value_or_throw("incomplete_beta");
  }
  return value;
}

}  // namespace

double incomplete_beta(double x, double a, double b) { return incomplete_beta_xy(x, 1.0 - x, a, b); }

double incomplete_beta_complement(double y, double a, double b) { return incomplete_beta_xy(1.0 - y, y, a, b); }

double bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k: x must be > 0");
  if (!std::isfinite(nu)) throw DomainError("bessel_k: nu must be finite");
  double v;
  try {
    v = bm::cyl_bessel_k(std::fabs(nu), x);
  } catch (const std::overflow_error&) {
    throw RangeError("bessel_k: overflow at nu=" + std::to_string(nu) + ", x=" + std::to_string(x));
  }
  if (!std::isfinite(v))
    throw RangeError("bessel_k: overflow at nu=" + std::to_string(nu) + ", x=" + std::to_string(x));
  return v;
}

double log_bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("log_bessel_k: x must be > 0");
  if (!std::isfinite(nu)) throw DomainError("log_bessel_k: nu must be finite");
  const double a = std::fabs(nu);
  double v = 0.0;
  try {
    v = bm::cyl_bessel_k(a, x);
  } catch (const std::overflow_error&) {
    v = std::numeric_limits<double>::infinity();
  } catch (const std::underflow_error&) {
    v = 0.0;
  }
  if (std::isfinite(v) && v >= std::numeric_limits<double>::min()) return std::log(v);
  if (std::isinf(v)) {
    // Small x: K_a(x) ~ Gamma(a)/2 (2/x)^a; overflow only happens where the
    // relative correction (order x^2) is far below double precision.
    return log_gamma(a) + a * std::log(2.0 / x) - std::log(2.0);
  }
  // Large x: K_a(x) ~ sqrt(pi/(2x)) e^{-x} sum_k prod_{j<=k}(4a^2-(2j-1)^2) / (k! (8x)^k).
  const double mu = 4.0 * a * a;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
    if (std::fabs(next) >= std::fabs(term)) break;
    term = next;
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x + std::log(sum);
}

double QuadratureResult::value_or_throw(const char* what) const {
  if (!converged) throw ConvergenceError(what, value, error);
  return value;
}

}  // namespace crm::math
