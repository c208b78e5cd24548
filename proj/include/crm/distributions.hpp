#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "crm/rng.hpp"

namespace crm::dist {

// Primitive laws. Gamma and exponential use the rate parameterization;
// the inverse gamma uses shape/scale (density b^a x^{-a-1} e^{-b/x} / Gamma(a)).
double sample_uniform(RngStream& rng);
double sample_exponential(double rate, RngStream& rng);
double sample_gamma(double shape, double rate, RngStream& rng);
double sample_beta(double a, double b, RngStream& rng);
double sample_inverse_gamma(double shape, double scale, RngStream& rng);
double sample_normal(double mean, double sd, RngStream& rng);

double exponential_pdf(double x, double rate);
double gamma_pdf(double x, double shape, double rate);
double gamma_log_pdf(double x, double shape, double rate);
double beta_pdf(double x, double a, double b);
double inverse_gamma_pdf(double x, double shape, double scale);
double normal_log_pdf(double x, double mean, double sd);

// BFRY(sigma): Gamma(1-sigma,1) / Beta(sigma,1).
double sample_bfry(double sigma, RngStream& rng);
double bfry_pdf(double w, double sigma);

// Exponentially tilted BFRY: density proportional to
// w^{-1-sigma} e^{-tau w} (1 - e^{-t w}). tau = 0 gives BFRY(sigma) / t.
double sample_etbfry(double sigma, double t, double tau, RngStream& rng);
double etbfry_pdf(double w, double sigma, double t, double tau);

// Generalized BFRY: Gamma(kappa-sigma,1) / Beta(sigma,1).
double sample_gbfry(double kappa, double sigma, RngStream& rng);
double gbfry_pdf(double w, double kappa, double sigma);

// Exponentially tilted generalized BFRY, density proportional to
// w^{-sigma-1} e^{-tau w} gamma_lower(kappa, t w).
struct EtgBfryParams {
  double kappa = 1.0;
  double sigma = 0.5;
  double t = 1.0;
  double tau = 1.0;
  // Prior parameters need sigma in (0,1); posteriors only need sigma < kappa.
  void validate(bool posterior = false) const;
  bool operator==(const EtgBfryParams&) const = default;
};

// int_0^inf w^{-sigma-1} e^{-tau w} gamma_lower(kappa, t w) dw
//   = tau^sigma Gamma(kappa-sigma) B_{t/(t+tau)}(kappa, -sigma)   (tau > 0).
double etgbfry_normalizer(const EtgBfryParams& p);
double etgbfry_pdf(const EtgBfryParams& p, double w);

// Normalized weights of the gamma-mixture representation, component j being
// Gamma(kappa+j-sigma, t+tau). Truncated once the remaining mass is below tail_tol.
std::vector<double> etgbfry_mixture_weights(const EtgBfryParams& p, double tail_tol = 1e-16);

// Reusable sampler: per-parameter setup (normalizer, route choice) is done once.
class EtgBfrySampler {
 public:
  explicit EtgBfrySampler(const EtgBfryParams& p);
  double operator()(RngStream& rng) const;
  const EtgBfryParams& params() const { return p_; }
  bool uses_mixture() const { return mixture_; }

 private:
  EtgBfryParams p_;
  bool mixture_ = true;
  double x_ = 0.0;      // t / (t + tau)
  double r0_ = 0.0;     // first unnormalized mixture weight
  double total_ = 0.0;  // sum of all mixture weights
};

double sample_etgbfry(const EtgBfryParams& p, RngStream& rng);

struct PoissonObservation { double lambda; double x; };   // X ~ Poisson(lambda w)
struct GammaObservation { double a; double x; };          // X ~ Gamma(a, rate w)
struct NormalObservation { double mu; double x; };        // X ~ N(mu, 1/w)
struct ParetoObservation { double x0; double x; };        // X ~ Pareto(x0, w)
using Observation = std::variant<PoissonObservation, GammaObservation, NormalObservation, ParetoObservation>;

EtgBfryParams etgbfry_conjugate_update(const EtgBfryParams& p, const Observation& obs);

// Inverse generalized BFRY: InverseGamma(kappa+sigma,1) / Beta(sigma,1).
double sample_igbfry(double kappa, double sigma, RngStream& rng);
double igbfry_pdf(double w, double kappa, double sigma);

// Exponentially tilted igBFRY, density proportional to
// w^{-1-sigma} e^{-tau w} Gamma_upper(kappa, 1/(t w)). There is no closed-form
// normalizer; it is computed by quadrature.
double etigbfry_unnormalized_pdf(double w, double kappa, double sigma, double t, double tau);
double etigbfry_normalizer(double kappa, double sigma, double t, double tau);

// Rejection from igBFRY/t with acceptance probability e^{-tau w}.
class EtigBfrySampler {
 public:
  EtigBfrySampler(double kappa, double sigma, double t, double tau);
  double operator()(RngStream& rng);
  double acceptance_rate() const;
  std::uint64_t proposals() const { return proposals_; }
  std::uint64_t accepted() const { return accepted_; }

 private:
  double kappa_, sigma_, t_, tau_;
  std::uint64_t proposals_ = 0;
  std::uint64_t accepted_ = 0;
  bool warned_ = false;
};

double sample_etigbfry(double kappa, double sigma, double t, double tau, RngStream& rng);

// Generalized inverse Gaussian, density proportional to w^{p-1} e^{-(a w + b/w)/2}.
double gig_log_normalizer(double p, double a, double b);
double gig_pdf(double w, double p, double a, double b);

class GigSampler {
 public:
  GigSampler(double p, double a, double b);
  double operator()(RngStream& rng) const;

 private:
  double h(double y) const;
  double dh(double y) const;
  double p_, a_, b_;
  double ym_, hm_, yl_, yr_, sl_, sr_;  // mode, flat band, tangent slopes
  double mass_left_, mass_mid_, mass_right_;
};

double sample_gig(double p, double a, double b, RngStream& rng);

}  // namespace crm::dist
