#include "crm/error_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "crm/distributions.hpp"
#include "crm/errors.hpp"
#include "crm/log.hpp"
#include "crm/special_math.hpp"

namespace crm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_grid(const std::vector<std::size_t>& n_grid, std::size_t n_hat) {
  if (n_grid.empty()) throw DomainError("n_grid must not be empty");
  if (n_grid.front() < 1) throw DomainError("n_grid entries must be >= 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw DomainError("n_grid must be strictly increasing");
  if (n_hat <= n_grid.back()) throw DomainError("n_hat must exceed max(n_grid)");
}

// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// int g(w) k(w t) rho(dw) with g applied to the CRM weight of each point.
double marked_integral(const SizeMeasure& m, const ArrivalKernel& k, double t, const WeightFunction& g,
                       const math::Tolerance& tol) {
  math::SemiaxisOptions opts;
  opts.scale = t > 0.0 ? 1.0 / t : 1.0;
  if (std::isfinite(m.upper_support())) opts.breakpoints.push_back(m.upper_support());
  if (k.is_atomic() && t > 0.0) opts.breakpoints.push_back(1.0 / t);
  std::sort(opts.breakpoints.begin(), opts.breakpoints.end());
  auto f = [&](double u) {
    const double d = m.density(u);
    if (d == 0.0) return 0.0;
    const double surv = t > 0.0 ? k.survival(u, t) : 1.0;
    if (surv == 0.0) return 0.0;
    return g(m.weight_from_point(u)) * surv * d;
  };
  return math::integrate_semiaxis(f, tol, opts).value_or_throw("marked integral did not converge");
}

// E[g(xi)] for xi ~ Gamma(n, 1); g(0) when n = 0.
double gamma_expectation(std::size_t n, const std::function<double(double)>& g) {
  if (n == 0) return g(0.0);
  const double a = static_cast<double>(n), sd = std::sqrt(a);
  std::vector<double> cuts;
  for (double z : {-40.0, -12.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 12.0, 40.0}) {
    double x = a - 1.0 + z * (sd + 1.0);
    if (z == 40.0) x += 40.0;
    cuts.push_back(std::max(0.0, x));
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const math::Tolerance tol{1e-10, 0.0, 200};
  auto f = [&](double xi) {
    if (xi <= 0.0) return n == 1 ? g(0.0) : 0.0;
    return dist::gamma_pdf(xi, a, 1.0) * g(xi);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += math::integrate_interval(f, cuts[i], cuts[i + 1], tol).value_or_throw("outer expectation did not converge");
  return total;
}

}  // namespace

std::vector<std::vector<double>> mc_truncation_samples(const SizeMeasure& m, const ArrivalKernel& k,
                                                       const std::vector<std::size_t>& n_grid, const ErrorOptions& opts,
                                                       const RngStream& rng) {
  const std::size_t n_hat = opts.n_hat ? opts.n_hat : 10 * (n_grid.empty() ? 0 : n_grid.back());
  check_grid(n_grid, n_hat);
  if (opts.arrival_reps < 1 || opts.jump_reps < 1) throw DomainError("replicate counts must be >= 1");
  const Construction con(m, k);
  {
    RngStream probe = rng.substream(0);
    con.sample_phi(1.0, probe);  // surfaces UnsupportedPair before any work
  }

  const std::size_t A = opts.arrival_reps, J = opts.jump_reps, G = n_grid.size();
  std::vector<std::vector<double>> per_rep(A);
  parallel_for(A, opts.threads, [&](std::size_t a) {
    RngStream arrivals = rng.substream(a + 1);
    const auto times = con.sample_arrival_times(n_hat, arrivals);
    auto& out = per_rep[a];
    out.assign(G * J, 0.0);
    std::vector<double> w(n_hat);
    for (std::size_t j = 0; j < J; ++j) {
      RngStream jumps = arrivals.substream(j + 1);
      for (std::size_t i = 0; i < n_hat; ++i) w[i] = m.weight_from_point(con.sample_phi(times[i], jumps));
      // Suffix sums from the smallest weights up avoid cancellation.
      double s = 0.0;
      std::size_t g = G;
      for (std::size_t i = n_hat; i-- > 0 && g > 0;) {
        s += w[i];
        if (i + 1 == n_grid[g - 1]) out[(--g) * J + j] = s;
      }
    }
  });

  std::vector<std::vector<double>> samples(G);
  for (std::size_t g = 0; g < G; ++g) {
    samples[g].reserve(A * J);
    for (std::size_t a = 0; a < A; ++a)
      samples[g].insert(samples[g].end(), per_rep[a].begin() + g * J, per_rep[a].begin() + (g + 1) * J);
  }
  return samples;
}

ErrorReport mc_truncation_error(const SizeMeasure& m, const ArrivalKernel& k, const std::vector<std::size_t>& n_grid,
                                const ErrorOptions& opts, const RngStream& rng) {
  ErrorReport r;
  r.process = m.name();
  r.kernel = k.name();
  r.n_grid = n_grid;
  r.n_hat = opts.n_hat ? opts.n_hat : 10 * (n_grid.empty() ? 0 : n_grid.back());
  r.arrival_reps = opts.arrival_reps;
  r.jump_reps = opts.jump_reps;
  r.seed = rng.seed();
  r.stream_id = rng.stream_id();
  r.variance_finite = variance_is_finite(m, k);
  if (!r.variance_finite) {
    r.warnings.push_back("infinite variance: the " + k.name() + " kernel tail (exponent " +
                         std::to_string(k.tail_exponent()) + ") is too heavy for sigma=" + std::to_string(m.sigma()) +
                         "; reported std does not converge as n_hat grows");
    warn(r.warnings.back());
  }

  const auto samples = mc_truncation_samples(m, k, n_grid, opts, rng);
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const auto& v = samples[g];
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    r.mc_mean.push_back(mean);
    r.mc_std.push_back(v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0);
  }

  std::string asym_note;
  for (std::size_t n : n_grid) {
    try {
      r.asym.push_back(asymptotic_error(m, k, static_cast<double>(n)));
    } catch (const std::exception& e) {
      r.asym.push_back(kNaN);
      asym_note = e.what();
    }
  }
  if (!asym_note.empty()) r.warnings.push_back("asymptotic error unavailable: " + asym_note);
  try {
    r.truncation_bias = asymptotic_error(m, k, static_cast<double>(r.n_hat));
  } catch (const std::exception&) {
    r.truncation_bias = kNaN;
  }

  const std::size_t lo = n_grid.size() / 2;
  if (n_grid.size() - lo >= 2) {
    std::vector<double> x, y;
    for (std::size_t g = lo; g < n_grid.size(); ++g) {
      x.push_back(static_cast<double>(n_grid[g]));
      y.push_back(r.mc_mean[g]);
    }
    if (std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; })) r.slope_fit = fit_loglog_slope(x, y);
  }
  return r;
}

bool variance_is_finite(const SizeMeasure& m, const ArrivalKernel& k) {
  if (std::isfinite(m.upper_support())) return true;
  if (m.family() == ProcessFamily::TransformedBP) return true;  // weights live in (0,1)
  if (m.is_ggp() && m.tau() > 0.0) return true;
  return k.tail_exponent() > 2.0 - m.sigma();
}

ConditionalMoments conditional_error_moments(const SizeMeasure& m, const ArrivalKernel& k, double t) {
  if (!(t > 0.0)) throw DomainError("conditional error moments: t must be positive");
  const math::Tolerance tol{1e-10, 0.0, 200};
  ConditionalMoments out{};
  out.mean = marked_integral(m, k, t, [](double w) { return w; }, tol);
  out.variance_finite = variance_is_finite(m, k);
  out.variance = out.variance_finite ? marked_integral(m, k, t, [](double w) { return w * w; }, tol)
                                     : std::numeric_limits<double>::infinity();
  return out;
}

double asymptotic_error(const SizeMeasure& m, const ArrivalKernel& k, double n) {
  if (!(n > 0.0)) throw DomainError("asymptotic error: n must be positive");
  const auto rv = m.regular_variation();
  if (!rv) throw DomainError("asymptotic error needs rho(w) ~ zeta0 w^{-1-sigma} with sigma in (0,1)");
  const double s = rv->sigma;
  const double c1 = k.c1_constant(s);
  return c1 * std::pow(rv->zeta0, 1.0 / s) * std::pow(s, 1.0 - 1.0 / s) * std::pow(n, 1.0 - 1.0 / s);
}

double error_mgf(const SizeMeasure& m, const ArrivalKernel& k, double lambda, std::size_t n, const WeightFunction& f) {
  if (!(lambda > 0.0)) throw DomainError("error_mgf: lambda must be positive");
  const Construction con(m, k);
  const math::Tolerance tol{1e-11, 0.0, 200};
  WeightFunction g = [&](double w) { return -std::expm1(-lambda * (f ? f(w) : w)); };
  return gamma_expectation(n, [&](double xi) {
    const double t = xi > 0.0 ? con.psi_inverse(xi) : 0.0;
    return std::exp(-marked_integral(m, k, t, g, tol));
  });
}

std::vector<MgfEstimate> mc_error_mgf(const SizeMeasure& m, const ArrivalKernel& k, const std::vector<double>& lambdas,
                                      std::size_t n, std::size_t draws, std::size_t n_hat, const RngStream& rng,
                                      unsigned threads) {
  if (n_hat <= n) throw DomainError("mc_error_mgf: n_hat must exceed n");
  if (draws < 2) throw DomainError("mc_error_mgf: need at least two draws");
  const Construction con(m, k);
  std::vector<double> r(draws);
  parallel_for(draws, threads, [&](std::size_t d) {
    RngStream s = rng.substream(d + 1);
    const auto crm = con.sample_sequential(n_hat, BaseMeasure::uniform(), s);
    double sum = 0.0;
    for (std::size_t i = n_hat; i-- > n;) sum += crm.atoms[i].w;
    r[d] = sum + conditional_error_moments(m, k, crm.atoms.back().t).mean;
  });
  std::vector<MgfEstimate> out;
  for (double lambda : lambdas) {
    double mean = 0.0, ss = 0.0;
    for (double x : r) mean += std::exp(-lambda * x);
    mean /= static_cast<double>(draws);
    for (double x : r) ss += (std::exp(-lambda * x) - mean) * (std::exp(-lambda * x) - mean);
    out.push_back({lambda, mean, std::sqrt(ss / static_cast<double>(draws - 1) / static_cast<double>(draws))});
  }
  return out;
}

double likelihood_bound_exponent(const SizeMeasure& m, const ArrivalKernel& k, std::size_t m_obs, std::size_t n,
                                 const WeightFunction& log_pi, BoundForm form) {
  if (!log_pi) throw DomainError("likelihood bound: log pi must be set");
  const Construction con(m, k);
  const math::Tolerance tol{1e-11, 0.0, 200};
  const double mo = static_cast<double>(m_obs);
  WeightFunction h = [&](double w) {
    const double lp = log_pi(w);
    if (!(lp <= 0.0)) throw DomainError("likelihood bound: pi(w) must lie in (0,1]");
    return form == BoundForm::Proof ? -std::expm1(mo * lp) : -mo * std::expm1(lp);
  };
  return gamma_expectation(n, [&](double xi) {
    const double t = xi > 0.0 ? con.psi_inverse(xi) : 0.0;
    return marked_integral(m, k, t, h, tol);
  });
}

double likelihood_bound(const SizeMeasure& m, const ArrivalKernel& k, std::size_t m_obs, std::size_t n,
                        const WeightFunction& log_pi, BoundForm form) {
  return -std::expm1(-likelihood_bound_exponent(m, k, m_obs, n, log_pi, form));
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs at least two paired points");
  double mx = 0.0, my = 0.0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("slope fit needs positive values");
    mx += std::log(x[i]) / k;
    my += std::log(y[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

dist::EtgBfryParams mixture_params(const MixtureOptions& o) {
  if (o.n < 1 || o.m < 1) throw DomainError("mixture demo: n and m must be >= 1");
  if (!(o.kappa > 1.0)) throw DomainError("mixture demo: kappa must exceed 1");
  if (!(o.h_sd > 0.0)) throw DomainError("mixture demo: h_sd must be positive");
  const double s = o.sigma;
  const double log_t = (std::log(s) + math::log_gamma(o.kappa) + math::log_gamma(1.0 - s) +
                        std::log(static_cast<double>(o.n)) - std::log(o.alpha) - math::log_gamma(o.kappa - s)) /
                       s;
  dist::EtgBfryParams p{o.kappa, s, std::exp(log_t), o.tau};
  p.validate();
  return p;
}

}  // namespace

MixtureDraw mixture_log_density(const MixtureOptions& opts, MixtureDraw d) {
  const auto p = mixture_params(opts);
  if (d.weights.size() != opts.n || d.locations.size() != opts.n || d.assignments.size() != opts.m ||
      d.observations.size() != opts.m)
    throw DomainError("mixture draw does not match (n, m)");
  d.t = p.t;
  d.log_prior_weights = 0.0;
  d.log_prior_locations = 0.0;
  for (std::size_t k = 0; k < opts.n; ++k) {
    d.log_prior_weights += std::log(dist::etgbfry_pdf(p, d.weights[k]));
    d.log_prior_locations += dist::normal_log_pdf(d.locations[k], 0.0, opts.h_sd);
  }
  const double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
  d.log_assignments = -static_cast<double>(opts.m) * std::log(total);
  d.log_likelihood = 0.0;
  for (std::size_t j = 0; j < opts.m; ++j) {
    const std::size_t z = d.assignments[j];
    if (z >= opts.n) throw DomainError("mixture draw: assignment out of range");
    d.log_assignments += std::log(d.weights[z]);
    d.log_likelihood += dist::normal_log_pdf(d.observations[j], d.locations[z], 1.0);
  }
  d.joint_log_density = d.log_prior_weights + d.log_prior_locations + d.log_assignments + d.log_likelihood;
  return d;
}

MixtureDraw mixture_prior_demo(const MixtureOptions& opts, RngStream& rng) {
  const auto p = mixture_params(opts);
  const dist::EtgBfrySampler sampler(p);
  MixtureDraw d{};
  for (std::size_t k = 0; k < opts.n; ++k) {
    d.weights.push_back(sampler(rng));
    d.locations.push_back(dist::sample_normal(0.0, opts.h_sd, rng));
  }
  std::vector<double> cum(opts.n);
  std::partial_sum(d.weights.begin(), d.weights.end(), cum.begin());
  for (std::size_t j = 0; j < opts.m; ++j) {
    const double u = rng.uniform() * cum.back();
    const auto z = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    d.assignments.push_back(std::min(z, opts.n - 1));
    d.observations.push_back(dist::sample_normal(d.locations[d.assignments.back()], 1.0, rng));
  }
  return mixture_log_density(opts, std::move(d));
}

}  // namespace crm
