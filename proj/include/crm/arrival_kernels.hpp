#pragma once

#include <string>
#include <string_view>

#include "crm/rng.hpp"

namespace crm {

enum class KernelFamily { Deterministic, Exponential, Gamma, InverseGamma, GeneralizedPareto };

// Open interval (lo, hi) on which a Mellin transform converges.
struct MellinStrip {
  double lo;
  double hi;
  bool contains(double z) const { return z > lo && z < hi; }
};

// Arrival-time law Lambda_w(t) = 1 - k(w t).
//   Deterministic:  k(x) = 1{x < 1}            (T = 1/w)
//   Exponential:    k(x) = e^{-x}
//   Gamma(kappa):   k(x) = Q(kappa, kappa x)   (T ~ Gamma(kappa, rate kappa w))
//   InvGamma(kappa): k(x) = P(kappa, kappa/x)  (T ~ InvGamma(kappa, scale kappa/w))
//   Pareto(c):      k(x) = (1+x)^{-c}
//
// Mellin convention: mellin_k(z) = int_0^inf t^{-z-1} k(t) dt and
// mellin_kprime(z) = int_0^inf t^{-z-1} k'(t) dt. Tabulated columns indexed
// by -z are obtained by negating the argument.
class ArrivalKernel {
 public:
  static ArrivalKernel deterministic();
  static ArrivalKernel exponential();
  static ArrivalKernel gamma(double kappa);
  static ArrivalKernel inverse_gamma(double kappa);
  static ArrivalKernel generalized_pareto(double c);
  // "deterministic", "exponential", "gamma:2", "invgamma:1", "pareto:3"
  static ArrivalKernel parse(std::string_view spec);

  KernelFamily family() const { return family_; }
  double kappa() const { return param_; }  // gamma / inverse gamma shape
  double c() const { return param_; }      // Pareto exponent
  bool is_atomic() const { return family_ == KernelFamily::Deterministic; }
  // Gamma(1) behaves exactly like the exponential kernel.
  bool is_exponential_like() const;

  double kernel(double x) const;             // k(x)
  double kernel_derivative(double x) const;  // k'(x); throws for the deterministic kernel
  double cdf(double w, double t) const;      // Lambda_w(t)
  double survival(double w, double t) const; // 1 - Lambda_w(t) = k(wt)
  double pdf(double w, double t) const;      // lambda_w(t)
  double sample(double w, RngStream& rng) const;
  // T ~ lambda_w conditioned on T <= t_max.
  double sample_truncated(double w, double t_max, RngStream& rng) const;

  MellinStrip mellin_strip() const;
  MellinStrip mellin_prime_strip() const;  // throws for the deterministic kernel
  double mellin_k(double z) const;
  double mellin_kprime(double z) const;

  // Tabulated closed form of C1(sigma); checks the convergence conditions.
  double c1_constant(double sigma) const;
  // ǩ(sigma-1) / (-ǩ'(sigma-1))^{1-1/sigma}; (1-sigma)^{-1} for the deterministic kernel.
  double c1_generic(double sigma) const;
  // q with k(x) ~ x^{-q} as x -> inf; infinity for light tails.
  double tail_exponent() const;

  std::string name() const;  // round-trips through parse()

 private:
  ArrivalKernel(KernelFamily f, double p) : family_(f), param_(p) {}
  void check_c1_conditions(double sigma) const;
  KernelFamily family_;
  double param_;
};

}  // namespace crm
