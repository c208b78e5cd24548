#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crm/arrival_kernels.hpp"
#include "crm/constructions.hpp"
#include "crm/rng.hpp"
#include "crm/size_measures.hpp"

namespace crm {

// Monte Carlo estimates of R_{n,nhat} = sum_{i=n}^{nhat} W_i under the nested
// protocol: arrival_reps arrival sequences, each with jump_reps jump resamples.
struct ErrorReport {
  std::string process;
  std::string kernel;
  std::vector<std::size_t> n_grid;
  std::vector<double> mc_mean;
  std::vector<double> mc_std;
  std::vector<double> asym;  // NaN where the asymptotic law does not apply
  std::optional<double> slope_fit;  // OLS of log mc_mean on log n, upper half of the grid
  std::size_t n_hat = 0;
  std::size_t arrival_reps = 0;
  std::size_t jump_reps = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  double truncation_bias = 0.0;  // asymptotic_error(n_hat), NaN if unavailable
  bool variance_finite = true;
  std::vector<std::string> warnings;
};

struct ErrorOptions {
  std::size_t n_hat = 0;  // 0: 10 * max(n_grid)
  std::size_t arrival_reps = 10;
  std::size_t jump_reps = 100;
  unsigned threads = 1;
};

// Results do not depend on options.threads.
ErrorReport mc_truncation_error(const SizeMeasure& m, const ArrivalKernel& k, const std::vector<std::size_t>& n_grid,
                                const ErrorOptions& opts, const RngStream& rng);

// Replicate values of R_{n,nhat} for each grid level, ordered by (arrival rep, jump rep).
std::vector<std::vector<double>> mc_truncation_samples(const SizeMeasure& m, const ArrivalKernel& k,
                                                       const std::vector<std::size_t>& n_grid, const ErrorOptions& opts,
                                                       const RngStream& rng);

// Whether int w^2 k(wt) rho(dw) is finite: fails for a heavy kernel tail
// (k(x) ~ x^{-q}, q <= 2 - sigma) on an untilted, unbounded process.
bool variance_is_finite(const SizeMeasure& m, const ArrivalKernel& k);

struct ConditionalMoments {
  double mean;
  double variance;  // +inf when variance_is_finite() is false
  bool variance_finite;
};
// Mean and variance of the sum of the weights arriving after time t.
ConditionalMoments conditional_error_moments(const SizeMeasure& m, const ArrivalKernel& k, double t);

// C1(sigma) zeta0^{1/sigma} sigma^{1-1/sigma} n^{1-1/sigma}.
double asymptotic_error(const SizeMeasure& m, const ArrivalKernel& k, double n);

using WeightFunction = std::function<double(double)>;

// E[exp(-lambda R_n)] for R_n = sum_{i>n} f(W_i). The points after T_n are
// exactly the atoms i > n, so the outer expectation is over xi_n ~ Gamma(n, 1).
double error_mgf(const SizeMeasure& m, const ArrivalKernel& k, double lambda, std::size_t n,
                 const WeightFunction& f = nullptr);

struct MgfEstimate {
  double lambda;
  double mean;
  double se;
};
// Monte Carlo E[exp(-lambda R_n)] from `draws` sequential constructions run to
// n_hat atoms; the remainder beyond T_{n_hat} is replaced by its conditional mean.
std::vector<MgfEstimate> mc_error_mgf(const SizeMeasure& m, const ArrivalKernel& k, const std::vector<double>& lambdas,
                                      std::size_t n, std::size_t draws, std::size_t n_hat, const RngStream& rng,
                                      unsigned threads = 1);

enum class BoundForm {
  Proof,      // B = E int (1 - pi(w)^m) k(w T_n) rho(dw)
  Statement,  // B = m E int (1 - pi(w)) k(w T_n) rho(dw), an upper bound on the proof form
};
// 1 - exp(-B_{m,n}): bound on half the L1 distance between the marginal
// likelihoods under the full and the n-atom measure. pi(w) = H(0 | w) is
// passed as log pi(w) <= 0 so that 1 - pi^m stays accurate for small w.
double likelihood_bound(const SizeMeasure& m, const ArrivalKernel& k, std::size_t m_obs, std::size_t n,
                        const WeightFunction& log_pi, BoundForm form = BoundForm::Proof);
// B_{m,n} itself.
double likelihood_bound_exponent(const SizeMeasure& m, const ArrivalKernel& k, std::size_t m_obs, std::size_t n,
                                 const WeightFunction& log_pi, BoundForm form = BoundForm::Proof);

// Ordinary least squares slope of log y on log x.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Prior draw from a finite iid normalized GGP mixture: weights iid
// etgBFRY(kappa, sigma, kappa f(n), tau), locations from H = Normal(0, h_sd^2),
// assignments z_j ~ Cat(w / w_total), observations x_j ~ Normal(theta_{z_j}, 1).
struct MixtureDraw {
  std::vector<double> weights;
  std::vector<double> locations;
  std::vector<std::size_t> assignments;
  std::vector<double> observations;
  double t;  // kappa f(n)
  double log_prior_weights;
  double log_prior_locations;
  double log_assignments;  // sum_k m_k log w_k - m log w_total
  double log_likelihood;
  double joint_log_density;
};

struct MixtureOptions {
  double alpha = 1.0;
  double sigma = 0.5;
  double tau = 1.0;
  double kappa = 2.0;
  std::size_t n = 100;
  std::size_t m = 50;
  double h_sd = 5.0;
};

MixtureDraw mixture_prior_demo(const MixtureOptions& opts, RngStream& rng);
// Joint log density of (weights, locations, assignments, observations).
MixtureDraw mixture_log_density(const MixtureOptions& opts, MixtureDraw draw);

}  // namespace crm
