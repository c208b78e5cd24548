#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "crm/arrival_kernels.hpp"
#include "crm/rng.hpp"
#include "crm/size_measures.hpp"

namespace crm {

enum class ConstructionKind { Sequential, Exchangeable, Iid };
std::string to_string(ConstructionKind kind);
ConstructionKind parse_construction_kind(const std::string& s);

// One point of the augmented Poisson process. t is NaN when the arrival time
// is not part of the construction (iid kind).
struct AugmentedAtom {
  double w;
  double theta;
  double t;
};

// Location law for atoms. The sampler receives the atom size so
// size-dependent location laws can be plugged in.
struct BaseMeasure {
  std::function<double(double w, RngStream& rng)> sample;
  std::string name;
  static BaseMeasure uniform();  // Uniform(0,1), ignores w
};

struct TruncatedCRM {
  ConstructionKind kind;
  std::size_t n;
  SizeMeasure process;
  ArrivalKernel kernel;
  std::vector<AugmentedAtom> atoms;
  std::optional<double> t_next;  // T_{n+1} (exchangeable)
  std::optional<double> t_star;  // deterministic time used by the iid kind
  bool asymptotic_time = false;  // t_star from the asymptotic inverse
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::string base_measure;

  double total_mass() const;
};

struct PairCatalogEntry {
  std::string process;
  std::string kernel;
  bool psi_closed = false;          // Psi
  bool psi_inverse_closed = false;  // Psi^{-1}
  bool psi_density_closed = false;  // psi = Psi'
  bool phi_sampler = false;         // W | T = t (sequential)
  bool phibar_sampler = false;      // W | T <= t (exchangeable / iid)
  std::string notes;
};

// All process/kernel combinations with dedicated formulas.
std::vector<PairCatalogEntry> pair_catalog();

namespace detail {
class PairModel;
}

// A (process, kernel) pair with its resolved closed forms. Cheap to copy.
class Construction {
 public:
  Construction(const SizeMeasure& process, const ArrivalKernel& kernel);

  const SizeMeasure& process() const;
  const ArrivalKernel& kernel() const;
  PairCatalogEntry entry() const;

  double laplace_exponent(double t) const;  // Psi(t)
  double psi_density(double t) const;       // psi(t) = Psi'(t)
  double psi_inverse(double xi) const;
  // (n / c)^{1/sigma}, c the leading coefficient of Psi(t) ~ c t^sigma.
  double asymptotic_inverse(double n) const;
  // Psi^{-1}(n), or asymptotic_inverse(n); memoized.
  double iid_time(std::size_t n, bool use_asymptotic) const;

  double phi_density(double t, double w) const;     // lambda_w(t) rho(w) / psi(t)
  double phibar_density(double t, double w) const;  // Lambda_w(t) rho(w) / Psi(t)
  // Samplers return the simulated point; for the transformed beta process
  // this is u, and process().weight_from_point(u) gives the weight.
  double sample_phi(double t, RngStream& rng) const;
  std::function<double(RngStream&)> phibar_sampler(double t) const;

  // T_1 < ... < T_n of the sequential construction.
  std::vector<double> sample_arrival_times(std::size_t n, RngStream& rng) const;
  // T_{i+1} from T_i given the unit-rate Poisson points xi_i < xi_{i+1}.
  double next_arrival(double t_prev, double xi_prev, double xi_next) const;

  TruncatedCRM sample_sequential(std::size_t n, const BaseMeasure& base, RngStream& rng) const;
  TruncatedCRM sample_exchangeable(std::size_t n, const BaseMeasure& base, RngStream& rng) const;
  TruncatedCRM sample_iid(std::size_t n, const BaseMeasure& base, bool use_asymptotic, RngStream& rng) const;

 private:
  void require_sampling() const;
  TruncatedCRM blank(ConstructionKind kind, std::size_t n, const BaseMeasure& base, const RngStream& rng) const;

  std::shared_ptr<const detail::PairModel> model_;
  struct Memo {
    std::mutex mutex;
    std::map<std::pair<std::size_t, bool>, double> times;
  };
  std::shared_ptr<Memo> memo_;
};

// Free-function forms.
double laplace_exponent(const SizeMeasure& m, const ArrivalKernel& k, double t);
double psi_density(const SizeMeasure& m, const ArrivalKernel& k, double t);
double psi_inverse(const SizeMeasure& m, const ArrivalKernel& k, double xi);
double asymptotic_inverse(const SizeMeasure& m, const ArrivalKernel& k, double n);
double conditional_density_phi(const SizeMeasure& m, const ArrivalKernel& k, double t, double w);
double conditional_density_phibar(const SizeMeasure& m, const ArrivalKernel& k, double t, double w);
TruncatedCRM sample_sequential(const SizeMeasure& m, const ArrivalKernel& k, std::size_t n, const BaseMeasure& base,
                               RngStream& rng);
TruncatedCRM sample_exchangeable(const SizeMeasure& m, const ArrivalKernel& k, std::size_t n,
                                 const BaseMeasure& base, RngStream& rng);
TruncatedCRM sample_iid(const SizeMeasure& m, const ArrivalKernel& k, std::size_t n, const BaseMeasure& base,
                        bool use_asymptotic, RngStream& rng);

// Rosinski's tempered-stable series for the GGP:
// W_i = min((xi_i sigma Gamma(1-sigma)/alpha)^{-1/sigma}, e_i u_i^{1/sigma}), e_i ~ Exp(tau).
TruncatedCRM sample_rosinski_ggp(double alpha, double sigma, double tau, std::size_t n, RngStream& rng,
                                 const BaseMeasure& base = BaseMeasure::uniform());

}  // namespace crm
