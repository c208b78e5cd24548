#include "crm/constructions.hpp"

#include <cmath>
#include <limits>

#include "crm/distributions.hpp"
#include "crm/errors.hpp"
#include "crm/special_math.hpp"
#include "pair_models.hpp"

namespace crm {

std::string to_string(ConstructionKind kind) {
  switch (kind) {
    case ConstructionKind::Sequential: return "sequential";
    case ConstructionKind::Exchangeable: return "exchangeable";
    case ConstructionKind::Iid: return "iid";
  }
  return "unknown";
}

ConstructionKind parse_construction_kind(const std::string& s) {
  if (s == "sequential" || s == "seq") return ConstructionKind::Sequential;
  if (s == "exchangeable" || s == "exch") return ConstructionKind::Exchangeable;
  if (s == "iid") return ConstructionKind::Iid;
  throw ConfigError("unknown construction kind '" + s + "' (expected sequential, exchangeable or iid)");
}

BaseMeasure BaseMeasure::uniform() {
  return {[](double, RngStream& rng) { return rng.uniform(); }, "uniform(0,1)"};
}

double TruncatedCRM::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.w;
  return s;
}

std::vector<PairCatalogEntry> pair_catalog() {
  const std::vector<std::pair<SizeMeasure, ArrivalKernel>> reps = {
      {SizeMeasure::ggp(1.0, 0.5, 1.0), ArrivalKernel::exponential()},
      {SizeMeasure::ggp(1.0, 0.5, 1.0), ArrivalKernel::gamma(2.0)},
      {SizeMeasure::stable(1.0, 0.5), ArrivalKernel::inverse_gamma(2.0)},
      {SizeMeasure::ggp(1.0, 0.5, 1.0), ArrivalKernel::inverse_gamma(1.0)},
      {SizeMeasure::ggp(1.0, 0.5, 1.0), ArrivalKernel::inverse_gamma(2.0)},
      {SizeMeasure::stable(1.0, 0.5), ArrivalKernel::generalized_pareto(2.0)},
      {SizeMeasure::sbp(1.0, 0.5, 2.0), ArrivalKernel::generalized_pareto(2.0)},
      {SizeMeasure::ggp(1.0, 0.5, 1.0), ArrivalKernel::deterministic()},
      {SizeMeasure::beta_process(1.0), ArrivalKernel::deterministic()},
      {SizeMeasure::transformed_bp(1.0), ArrivalKernel::inverse_gamma(1.0)},
  };
  std::vector<PairCatalogEntry> out;
  for (const auto& [m, k] : reps) {
    auto e = detail::make_pair_model(m, k)->describe();
    out.push_back(std::move(e));
  }
  return out;
}

Construction::Construction(const SizeMeasure& process, const ArrivalKernel& kernel)
    : model_(detail::make_pair_model(process, kernel)), memo_(std::make_shared<Memo>()) {}

const SizeMeasure& Construction::process() const { return model_->m; }
const ArrivalKernel& Construction::kernel() const { return model_->k; }
PairCatalogEntry Construction::entry() const { return model_->describe(); }

double Construction::laplace_exponent(double t) const {
  if (!(t >= 0.0)) throw DomainError("Psi: t must be nonnegative");
  if (t == 0.0) return 0.0;
  return model_->Psi(t);
}

double Construction::psi_density(double t) const {
  if (!(t > 0.0)) throw DomainError("psi: t must be positive");
  return model_->psi(t);
}

double Construction::psi_inverse(double xi) const {
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw DomainError("Psi^{-1}: xi must be finite and nonnegative");
  if (xi == 0.0) return 0.0;
  if (auto t = model_->Psi_inverse(xi)) {
    if (!std::isfinite(*t)) throw RangeError("Psi^{-1}: arrival time exceeds double range at xi=" + std::to_string(xi));
    return *t;
  }
  // Psi may grow only logarithmically (gamma and beta processes), in which
  // case the bracket search runs off to infinity for large xi.
  auto out_of_range = [&] { return model_->Psi(1e300) < xi; };
  double t;
  try {
    t = math::invert_increasing([this](double s) { return model_->Psi(s); }, xi, model_->inverse_guess(xi),
                                {1e-12, 0.0, 400});
  } catch (const ConvergenceError&) {
    if (out_of_range()) t = std::numeric_limits<double>::infinity();
    else throw;
  }
  if (!std::isfinite(t)) throw RangeError("Psi^{-1}: arrival time exceeds double range at xi=" + std::to_string(xi));
  return t;
}

double Construction::asymptotic_inverse(double n) const {
  if (!(n > 0.0)) throw DomainError("asymptotic inverse: n must be positive");
  const auto c = detail::leading_coefficient(process(), kernel());
  if (!c) throw DomainError("asymptotic inverse needs a regularly varying process and a kernel with finite -k'(sigma-1)");
  return std::pow(n / *c, 1.0 / process().sigma());
}

double Construction::iid_time(std::size_t n, bool use_asymptotic) const {
  const auto key = std::make_pair(n, use_asymptotic);
  {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    auto it = memo_->times.find(key);
    if (it != memo_->times.end()) return it->second;
  }
  const double t = use_asymptotic ? asymptotic_inverse(static_cast<double>(n)) : psi_inverse(static_cast<double>(n));
  std::lock_guard<std::mutex> lock(memo_->mutex);
  memo_->times.emplace(key, t);
  return t;
}

double Construction::phi_density(double t, double w) const {
  if (kernel().is_atomic()) throw DomainError("W | T = t is a point mass for the deterministic kernel");
  if (!(t > 0.0) || !(w > 0.0)) throw DomainError("phi: t and w must be positive");
  const double d = process().density(w);
  const double lam = d == 0.0 ? 0.0 : kernel().pdf(w, t);
  return lam == 0.0 ? 0.0 : lam * d / psi_density(t);
}

double Construction::phibar_density(double t, double w) const {
  if (!(t > 0.0) || !(w > 0.0)) throw DomainError("phi-bar: t and w must be positive");
  const double d = process().density(w);
  return d == 0.0 ? 0.0 : kernel().cdf(w, t) * d / laplace_exponent(t);
}

double Construction::sample_phi(double t, RngStream& rng) const {
  require_sampling();
  return model_->sample_phi(t, rng);
}

std::function<double(RngStream&)> Construction::phibar_sampler(double t) const {
  require_sampling();
  if (!(t > 0.0)) throw DomainError("phi-bar sampler: t must be positive");
  if (laplace_exponent(t) == 0.0) throw DomainError("phi-bar sampler: no atom can arrive by t=" + std::to_string(t));
  return model_->phibar(t);
}

double Construction::next_arrival(double t_prev, double xi_prev, double xi_next) const {
  if (!(xi_next > xi_prev)) throw DomainError("next_arrival: xi must be increasing");
  if (auto t = model_->Psi_inverse(xi_next)) return *t;
  if (!(t_prev > 0.0)) return psi_inverse(xi_next);

  // Solve int_{t_prev}^t psi = xi_next - xi_prev by safeguarded Newton; this
  // avoids the cancellation in Psi(t) - Psi(t_prev) for large xi.
  const double d = xi_next - xi_prev;
  const double tol = 1e-12 * xi_next;
  const math::Tolerance qtol{1e-13, 0.0, 200};
  auto ps = [this](double s) { return model_->psi(s); };
  double lo = t_prev, hi = std::numeric_limits<double>::infinity();
  double t = t_prev + d / model_->psi(t_prev);
  for (int it = 0; it < 200; ++it) {
    const double g = math::integrate_interval(ps, t_prev, t, qtol).value - d;
    if (std::abs(g) <= tol) return t;
    (g < 0.0 ? lo : hi) = t;
    double tn = t - g / model_->psi(t);
    if (!(tn > lo && tn < hi)) tn = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 2.0 * (lo - t_prev) + d / model_->psi(lo);
    if (std::isfinite(hi) && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return tn;
    t = tn;
  }
  throw ConvergenceError("next_arrival: Newton iteration did not converge", t, hi - lo);
}

std::vector<double> Construction::sample_arrival_times(std::size_t n, RngStream& rng) const {
  std::vector<double> ts;
  ts.reserve(n);
  double xi = 0.0, t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xn = xi + dist::sample_exponential(1.0, rng);
    t = next_arrival(t, xi, xn);
    xi = xn;
    ts.push_back(t);
  }
  return ts;
}

void Construction::require_sampling() const {
  if (process().is_ggp() && process().sigma() < 0.0)
    throw UnsupportedPair("finite-activity GGP (sigma < 0) has finitely many atoms; truncated constructions "
                          "are not defined for it");
}

TruncatedCRM Construction::blank(ConstructionKind kind, std::size_t n, const BaseMeasure& base,
                                 const RngStream& rng) const {
  TruncatedCRM out{kind, n, process(), kernel(), {}, std::nullopt, std::nullopt, false, rng.seed(), rng.stream_id(),
                   base.name};
  out.atoms.reserve(n);
  return out;
}

TruncatedCRM Construction::sample_sequential(std::size_t n, const BaseMeasure& base, RngStream& rng) const {
  require_sampling();
  auto out = blank(ConstructionKind::Sequential, n, base, rng);
  double xi = 0.0, t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xn = xi + dist::sample_exponential(1.0, rng);
    t = next_arrival(t, xi, xn);
    xi = xn;
    const double w = process().weight_from_point(model_->sample_phi(t, rng));
    out.atoms.push_back({w, base.sample(w, rng), t});
  }
  return out;
}

TruncatedCRM Construction::sample_exchangeable(std::size_t n, const BaseMeasure& base, RngStream& rng) const {
  require_sampling();
  auto out = blank(ConstructionKind::Exchangeable, n, base, rng);
  const double xi = dist::sample_gamma(static_cast<double>(n) + 1.0, 1.0, rng);
  const double t_next = psi_inverse(xi);
  out.t_next = t_next;
  auto draw = model_->phibar(t_next);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = draw(rng);
    const double t = kernel().sample_truncated(u, t_next, rng);
    const double w = process().weight_from_point(u);
    out.atoms.push_back({w, base.sample(w, rng), t});
  }
  return out;
}

TruncatedCRM Construction::sample_iid(std::size_t n, const BaseMeasure& base, bool use_asymptotic,
                                      RngStream& rng) const {
  require_sampling();
  auto out = blank(ConstructionKind::Iid, n, base, rng);
  if (n == 0) return out;
  const double t = iid_time(n, use_asymptotic);
  out.t_star = t;
  out.asymptotic_time = use_asymptotic;
  auto draw = model_->phibar(t);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = process().weight_from_point(draw(rng));
    out.atoms.push_back({w, base.sample(w, rng), std::numeric_limits<double>::quiet_NaN()});
  }
  return out;
}

double laplace_exponent(const SizeMeasure& m, const ArrivalKernel& k, double t) {
  return Construction(m, k).laplace_exponent(t);
}
double psi_density(const SizeMeasure& m, const ArrivalKernel& k, double t) { return Construction(m, k).psi_density(t); }
double psi_inverse(const SizeMeasure& m, const ArrivalKernel& k, double xi) {
  return Construction(m, k).psi_inverse(xi);
}
double asymptotic_inverse(const SizeMeasure& m, const ArrivalKernel& k, double n) {
  return Construction(m, k).asymptotic_inverse(n);
}
double conditional_density_phi(const SizeMeasure& m, const ArrivalKernel& k, double t, double w) {
  return Construction(m, k).phi_density(t, w);
}
double conditional_density_phibar(const SizeMeasure& m, const ArrivalKernel& k, double t, double w) {
  return Construction(m, k).phibar_density(t, w);
}
TruncatedCRM sample_sequential(const SizeMeasure& m, const ArrivalKernel& k, std::size_t n, const BaseMeasure& base,
                               RngStream& rng) {
  return Construction(m, k).sample_sequential(n, base, rng);
}
TruncatedCRM sample_exchangeable(const SizeMeasure& m, const ArrivalKernel& k, std::size_t n,
                                 const BaseMeasure& base, RngStream& rng) {
  return Construction(m, k).sample_exchangeable(n, base, rng);
}
TruncatedCRM sample_iid(const SizeMeasure& m, const ArrivalKernel& k, std::size_t n, const BaseMeasure& base,
                        bool use_asymptotic, RngStream& rng) {
  return Construction(m, k).sample_iid(n, base, use_asymptotic, rng);
}

TruncatedCRM sample_rosinski_ggp(double alpha, double sigma, double tau, std::size_t n, RngStream& rng,
                                 const BaseMeasure& base) {
  const auto m = SizeMeasure::ggp(alpha, sigma, tau);
  if (!(sigma > 0.0)) throw DomainError("Rosinski series needs sigma in (0, 1)");
  TruncatedCRM out{ConstructionKind::Sequential, n, m, ArrivalKernel::deterministic(), {}, std::nullopt,
                   std::nullopt, false, rng.seed(), rng.stream_id(), base.name};
  out.atoms.reserve(n);
  const double scale = sigma * std::exp(math::log_gamma(1.0 - sigma)) / alpha;
  double xi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xi += dist::sample_exponential(1.0, rng);
    double w = std::pow(xi * scale, -1.0 / sigma);
    if (tau > 0.0) {
      const double e = dist::sample_exponential(tau, rng);
      w = std::min(w, e * std::pow(rng.uniform(), 1.0 / sigma));
    }
    out.atoms.push_back({w, base.sample(w, rng), xi});
  }
  return out;
}

}  // namespace crm
