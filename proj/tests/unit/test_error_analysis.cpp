#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "crm/constructions.hpp"
#include "crm/distributions.hpp"
#include "crm/error_analysis.hpp"
#include "crm/errors.hpp"
#include "stats.hpp"

using namespace crm;

TEST(ErrorAnalysis, DeterministicKernelHasNoJumpNoise) {
  const auto m = SizeMeasure::stable(2.0, 0.5);
  const auto k = ArrivalKernel::deterministic();
  const RngStream rng(5);
  ErrorOptions o;
  o.n_hat = 400;
  o.arrival_reps = 2;
  o.jump_reps = 3;
  const auto s = mc_truncation_samples(m, k, {10, 100}, o, rng);
  ASSERT_EQ(s.size(), 2u);
  ASSERT_EQ(s[0].size(), 6u);
  // Direct evaluation from the same arrival stream: W_i = 1/T_i.
  for (std::size_t a = 0; a < 2; ++a) {
    RngStream arrivals = rng.substream(a + 1);
    const auto t = Construction(m, k).sample_arrival_times(o.n_hat, arrivals);
    for (std::size_t g = 0; g < 2; ++g) {
      const std::size_t n = g == 0 ? 10 : 100;
      double direct = 0.0;
      for (std::size_t i = o.n_hat; i-- > n - 1;) direct += 1.0 / t[i];
      for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(s[g][a * 3 + j], direct);
    }
  }
}

TEST(ErrorAnalysis, ReportFieldsAndThreadInvariance) {
  const auto m = SizeMeasure::ggp(2.0, 0.4, 1.0);
  const auto k = ArrivalKernel::gamma(1.0);
  ErrorOptions o;
  o.arrival_reps = 3;
  o.jump_reps = 5;
  const auto a = mc_truncation_error(m, k, {16, 32, 64, 128}, o, RngStream(9, 2));
  o.threads = 3;
  const auto b = mc_truncation_error(m, k, {16, 32, 64, 128}, o, RngStream(9, 2));
  EXPECT_EQ(a.n_hat, 1280u);
  EXPECT_EQ(a.seed, 9u);
  EXPECT_EQ(a.stream_id, 2u);
  ASSERT_EQ(a.mc_mean.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a.mc_mean[i], b.mc_mean[i]);
    EXPECT_EQ(a.mc_std[i], b.mc_std[i]);
    EXPECT_GT(a.mc_mean[i], 0.0);
    if (i) EXPECT_LT(a.mc_mean[i], a.mc_mean[i - 1]);
    EXPECT_NEAR(a.asym[i], asymptotic_error(m, k, static_cast<double>(a.n_grid[i])), 1e-15);
  }
  EXPECT_TRUE(a.slope_fit.has_value());
  EXPECT_TRUE(a.variance_finite);
  EXPECT_NEAR(a.truncation_bias, asymptotic_error(m, k, 1280.0), 1e-15);
}

TEST(ErrorAnalysis, GridValidation) {
  const auto m = SizeMeasure::stable(1.0, 0.5);
  const auto k = ArrivalKernel::exponential();
  ErrorOptions o;
  o.n_hat = 100;
  EXPECT_THROW(mc_truncation_error(m, k, {10, 100}, o, RngStream(1)), DomainError);
  EXPECT_THROW(mc_truncation_error(m, k, {20, 10}, o, RngStream(1)), DomainError);
  EXPECT_THROW(mc_truncation_error(m, k, {}, o, RngStream(1)), DomainError);
  o.jump_reps = 0;
  EXPECT_THROW(mc_truncation_error(m, k, {10}, o, RngStream(1)), DomainError);
  EXPECT_THROW(mc_truncation_error(SizeMeasure::ggp(1.0, 0.5, 1.0), ArrivalKernel::generalized_pareto(3.0), {10},
                                   ErrorOptions{}, RngStream(1)),
               UnsupportedPair);
}

TEST(ErrorAnalysis, InfiniteVarianceFlag) {
  const auto m = SizeMeasure::stable(2.0, 0.4);
  EXPECT_FALSE(variance_is_finite(m, ArrivalKernel::inverse_gamma(1.0)));
  EXPECT_TRUE(variance_is_finite(m, ArrivalKernel::inverse_gamma(1.7)));
  EXPECT_TRUE(variance_is_finite(m, ArrivalKernel::gamma(1.0)));
  EXPECT_TRUE(variance_is_finite(SizeMeasure::ggp(2.0, 0.4, 1.0), ArrivalKernel::inverse_gamma(1.0)));
  EXPECT_TRUE(variance_is_finite(SizeMeasure::sbp(1.0, 0.5, 1.0), ArrivalKernel::generalized_pareto(1.0)));
  ErrorOptions o;
  o.arrival_reps = 2;
  o.jump_reps = 2;
  const auto r = mc_truncation_error(m, ArrivalKernel::inverse_gamma(1.0), {10, 20}, o, RngStream(3));
  EXPECT_FALSE(r.variance_finite);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("infinite variance"), std::string::npos);
  const auto cm = conditional_error_moments(m, ArrivalKernel::inverse_gamma(1.0), 5.0);
  EXPECT_FALSE(cm.variance_finite);
  EXPECT_TRUE(std::isinf(cm.variance));
  EXPECT_TRUE(std::isfinite(cm.mean));
}

TEST(ErrorAnalysis, ConditionalMoments) {
  const double a = 2.0, s = 0.5, tau = 1.0;
  const auto m = SizeMeasure::ggp(a, s, tau);
  double prev = INFINITY;
  for (double t : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    const auto cm = conditional_error_moments(m, ArrivalKernel::exponential(), t);
    const double mean = a * std::pow(t + tau, s - 1.0);
    // int w^2 e^{-wt} rho(dw) = alpha (1 - sigma) (t + tau)^{sigma - 2}
    const double var = a * (1.0 - s) * std::pow(t + tau, s - 2.0);
    EXPECT_NEAR(cm.mean, mean, 1e-9 * mean);
    EXPECT_NEAR(cm.variance, var, 1e-9 * var);
    EXPECT_LT(cm.mean, prev);
    prev = cm.mean;
  }
  const auto k = ArrivalKernel::gamma(2.0);
  const double t = 1e3;
  const double lim = k.mellin_k(s - 1.0) * m.regular_variation()->zeta0;
  EXPECT_NEAR(conditional_error_moments(m, k, t).mean * std::pow(t, 1.0 - s) / lim, 1.0, 0.02);
}

TEST(ErrorAnalysis, AsymptoticError) {
  for (double a : {1.0, 2.0})
    for (double n : {10.0, 1000.0}) {
      const double v = 4.0 * a * a / std::numbers::pi / n;
      EXPECT_NEAR(asymptotic_error(SizeMeasure::stable(a, 0.5), ArrivalKernel::deterministic(), n), v, 1e-12 * v);
    }
  // GGP x Gamma(kappa): (kappa-sigma) Gamma(kappa-sigma)^{1/sigma} / ((1-sigma) Gamma(kappa)^{1/sigma}) zeta0^{1/sigma} ...
  const double a = 2.0, s = 0.4, kap = 2.0, n = 500.0;
  const double c1 = (kap - s) * std::pow(std::tgamma(kap - s), 1 / s) / ((1 - s) * std::pow(std::tgamma(kap), 1 / s));
  const double v = c1 * std::pow(a / std::tgamma(1 - s), 1 / s) * std::pow(s, 1 - 1 / s) * std::pow(n, 1 - 1 / s);
  EXPECT_NEAR(asymptotic_error(SizeMeasure::ggp(a, s, 1.0), ArrivalKernel::gamma(kap), n), v, 1e-12 * v);
  EXPECT_THROW(asymptotic_error(SizeMeasure::gamma_process(1.0, 1.0), ArrivalKernel::exponential(), 10.0), DomainError);
  EXPECT_THROW(asymptotic_error(SizeMeasure::stable(1.0, 0.5), ArrivalKernel::inverse_gamma(1.0), 10.0), DomainError);
}

TEST(ErrorAnalysis, C1Crossover) {
  const auto g = ArrivalKernel::gamma(2.0), ig = ArrivalKernel::inverse_gamma(2.0);
  EXPECT_LT(g.c1_constant(0.4), ig.c1_constant(0.4));
  EXPECT_GT(g.c1_constant(0.7), ig.c1_constant(0.7));
}

TEST(ErrorAnalysis, MgfLimits) {
  const auto m = SizeMeasure::stable(2.0, 0.5);
  const auto k = ArrivalKernel::gamma(1.0);
  EXPECT_NEAR(error_mgf(m, k, 1e-9, 10), 1.0, 1e-8);
  double prev = 0.0;
  for (std::size_t n : {5u, 50u, 500u, 5000u}) {
    const double v = error_mgf(m, k, 1.0, n);
    EXPECT_GT(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
  EXPECT_GT(prev, 0.99);
  // With f = 0 nothing is ever missed.
  EXPECT_NEAR(error_mgf(m, k, 1.0, 10, [](double) { return 0.0; }), 1.0, 1e-14);
  EXPECT_THROW(error_mgf(m, k, -1.0, 10), DomainError);
}

TEST(ErrorAnalysis, MgfExactForExponentialKernel) {
  // Stable x exponential, n = 1: xi_1 ~ Exp(1), T = (sigma xi / alpha)^{1/sigma} and
  // int (1 - e^{-lambda w}) e^{-wT} rho(dw) = Psi(T + lambda) - Psi(T).
  const double a = 2.0, s = 0.5, lam = 1.0;
  const auto v = error_mgf(SizeMeasure::stable(a, s), ArrivalKernel::exponential(), lam, 1);
  const double q = crm::testing::total_mass([&](double xi) {
    const double t = std::pow(s * xi / a, 1.0 / s);
    return std::exp(-xi) * std::exp(-(a / s) * (std::pow(t + lam, s) - std::pow(t, s)));
  });
  EXPECT_NEAR(v, q, 1e-8);
}

TEST(ErrorAnalysis, MgfMatchesMonteCarloSmall) {
  const auto m = SizeMeasure::stable(2.0, 0.5);
  const auto k = ArrivalKernel::gamma(1.0);
  const auto est = mc_error_mgf(m, k, {1.0}, 10, 2000, 1000, RngStream(17));
  ASSERT_EQ(est.size(), 1u);
  EXPECT_NEAR(est[0].mean, error_mgf(m, k, 1.0, 10), 3.0 * est[0].se);
}

TEST(ErrorAnalysis, LikelihoodBound) {
  const auto m = SizeMeasure::ggp(2.0, 0.5, 1.0);
  const auto k = ArrivalKernel::exponential();
  auto log_pi = [](double w) { return -w; };
  // Independent double quadrature (mpmath) with the closed-form inner integral.
  EXPECT_NEAR(likelihood_bound_exponent(m, k, 5, 10, log_pi), 2.697688183006519640, 1e-6 * 2.6977);
  EXPECT_NEAR(likelihood_bound(m, k, 5, 10, log_pi), 0.93263894068551206307, 1e-6);
  EXPECT_NEAR(likelihood_bound_exponent(m, k, 20, 50, log_pi), 2.929615237183685459, 1e-6 * 2.9296);
  EXPECT_EQ(likelihood_bound(m, k, 5, 10, [](double) { return 0.0; }), 0.0);
  EXPECT_GE(likelihood_bound_exponent(m, k, 5, 10, log_pi, BoundForm::Statement),
            likelihood_bound_exponent(m, k, 5, 10, log_pi));
  EXPECT_THROW(likelihood_bound(m, k, 5, 10, [](double) { return 0.5; }), DomainError);
}

TEST(ErrorAnalysis, LikelihoodBoundMonotone) {
  const auto m = SizeMeasure::stable(1.0, 0.5);
  const auto k = ArrivalKernel::gamma(2.0);
  auto log_pi = [](double w) { return -w; };
  double prev = 2.0;
  for (std::size_t n : {1u, 10u, 100u, 1000u}) {
    const double b = likelihood_bound(m, k, 10, n, log_pi);
    EXPECT_LE(b, prev);
    prev = b;
  }
  prev = -1.0;
  for (std::size_t mo : {1u, 5u, 25u, 125u}) {
    const double b = likelihood_bound(m, k, mo, 100, log_pi);
    EXPECT_GE(b, prev);
    prev = b;
  }
}

TEST(ErrorAnalysis, SlopeFit) {
  std::vector<double> x{10, 20, 40, 80}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  EXPECT_NEAR(fit_loglog_slope(x, y), -1.5, 1e-12);
  EXPECT_THROW(fit_loglog_slope({1.0}, {1.0}), DomainError);
  EXPECT_THROW(fit_loglog_slope({1.0, 2.0}, {1.0, 0.0}), DomainError);
}

TEST(ErrorAnalysis, MixtureDemo) {
  MixtureOptions o;
  o.n = 100;
  o.m = 5000;
  RngStream rng(23);
  const auto d = mixture_prior_demo(o, rng);
  ASSERT_EQ(d.weights.size(), 100u);
  ASSERT_EQ(d.assignments.size(), 5000u);
  // t = kappa f(n)
  const double s = o.sigma, kap = o.kappa;
  const double f = std::pow(s * std::tgamma(kap) * std::tgamma(1 - s) * o.n / (o.alpha * std::pow(kap, s) * std::tgamma(kap - s)), 1 / s);
  EXPECT_NEAR(d.t, kap * f, 1e-10 * d.t);

  // Assignment frequencies match w_k / w_total.
  const double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
  std::vector<double> counts(o.n, 0.0);
  for (auto z : d.assignments) counts[z] += 1.0;
  for (std::size_t k = 0; k < o.n; ++k) {
    const double p = d.weights[k] / total;
    EXPECT_NEAR(counts[k] / o.m, p, 3.0 * std::sqrt(p * (1 - p) / o.m) + 1e-12) << k;
  }

  // Joint density recomputed term by term.
  const dist::EtgBfryParams p{kap, s, d.t, o.tau};
  double lw = 0.0, lh = 0.0, la = -static_cast<double>(o.m) * std::log(total), ll = 0.0;
  for (std::size_t k = 0; k < o.n; ++k) {
    lw += std::log(dist::etgbfry_pdf(p, d.weights[k]));
    lh += -0.5 * std::pow(d.locations[k] / o.h_sd, 2) - std::log(o.h_sd * std::sqrt(2 * std::numbers::pi));
  }
  for (std::size_t j = 0; j < o.m; ++j) {
    la += std::log(d.weights[d.assignments[j]]);
    ll += -0.5 * std::pow(d.observations[j] - d.locations[d.assignments[j]], 2) - 0.5 * std::log(2 * std::numbers::pi);
  }
  EXPECT_NEAR(d.joint_log_density, lw + lh + la + ll, 1e-10 * std::abs(d.joint_log_density));
  EXPECT_NEAR(d.log_assignments, la, 1e-10 * std::abs(la));
  EXPECT_NEAR(d.log_likelihood, ll, 1e-10 * std::abs(ll));
}

TEST(ErrorAnalysis, MixtureWeightsAreEtgBfry) {
  MixtureOptions o;
  o.m = 1;
  std::vector<double> w;
  double t = 0.0;
  for (int r = 0; r < 200; ++r) {
    RngStream rng(29, r);
    const auto d = mixture_prior_demo(o, rng);
    t = d.t;
    w.insert(w.end(), d.weights.begin(), d.weights.end());
  }
  const dist::EtgBfryParams p{o.kappa, o.sigma, t, o.tau};
  EXPECT_GT(crm::testing::ks_pvalue_pdf(w, [&](double x) { return dist::etgbfry_pdf(p, x); }), 0.01);
}
