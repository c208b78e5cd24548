#pragma once

#include <functional>
#include <vector>

namespace crm::math {

struct Tolerance {
  double rel = 1e-10;
  double abs = 0.0;
  int max_iter = 200;
  void validate() const;  // throws DomainError
};

double log_gamma(double x);
// Gamma function for any non-pole real argument.
double gamma_fn(double x);
double log_beta(double a, double b);
double beta_fn(double a, double b);

double lower_incomplete_gamma(double a, double x, bool regularized = false);
// Generalized upper incomplete gamma: any real a, x > 0.
double upper_incomplete_gamma(double a, double x);
// Regularized P(a, x) and Q(a, x), a > 0.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
// Unregularized B_x(a, b) = int_0^x u^{a-1} (1-u)^{b-1} du; b may be negative.
double incomplete_beta(double x, double a, double b);
// B_{1-y}(a, b), accurate when 1 - y is close to 1.
double incomplete_beta_complement(double y, double a, double b);
double bessel_k(double nu, double x);
// log K_nu(x), finite where K_nu itself under- or overflows.
double log_bessel_k(double nu, double x);

using RealFunction = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
  // Throws ConvergenceError (with the estimate attached) when not converged.
  double value_or_throw(const char* what = "quadrature did not converge") const;
};

// Globally adaptive Gauss-Kronrod (10/21) on [a, b]. Tolerance::max_iter caps
// the number of subintervals (at least 50 are always allowed).
QuadratureResult integrate_interval(const RealFunction& f, double a, double b, const Tolerance& tol = {});

// Tanh-sinh rule on (a, b); tolerates integrable singularities at both ends.
QuadratureResult integrate_singular(const RealFunction& f, double a, double b, const Tolerance& tol = {});

struct SemiaxisOptions {
  double scale = 1.0;               // where the integrand's mass lives
  std::vector<double> breakpoints;  // known kinks/discontinuities in (0, inf)
};

// int_0^inf f. The half line is mapped to (0,1) via u = w/(scale + w), then
// integrated with the tanh-sinh rule, which absorbs the w^{-sigma} endpoint
// behaviour at 0 and algebraic tails at infinity.
QuadratureResult integrate_semiaxis(const RealFunction& f, const Tolerance& tol = {},
                                    const SemiaxisOptions& opts = {});

// x with g(x) ~= y for nondecreasing g on (0, inf). Brackets around guess by
// factors of 4, then runs Brent's method in log x.
double invert_increasing(const RealFunction& g, double y, double guess, const Tolerance& tol = {});

}  // namespace crm::math
