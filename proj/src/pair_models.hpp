#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "crm/arrival_kernels.hpp"
#include "crm/constructions.hpp"
#include "crm/rng.hpp"
#include "crm/size_measures.hpp"

namespace crm::detail {

using WeightSampler = std::function<double(RngStream&)>;

// Closed forms and samplers for one (process, kernel) pair. The base class
// supplies quadrature fallbacks for Psi and psi; samplers default to
// UnsupportedPair.
class PairModel {
 public:
  PairModel(const SizeMeasure& m, const ArrivalKernel& k) : m(m), k(k) {}
  virtual ~PairModel() = default;

  virtual double Psi(double t) const { return numeric_Psi(t); }
  virtual double psi(double t) const { return numeric_psi(t); }
  virtual std::optional<double> Psi_inverse(double) const { return std::nullopt; }
  // Starting point for numeric inversion of Psi.
  virtual double inverse_guess(double xi) const;
  virtual double sample_phi(double t, RngStream& rng) const;
  virtual WeightSampler phibar(double t) const;
  virtual PairCatalogEntry describe() const;

  double numeric_Psi(double t) const;
  double numeric_psi(double t) const;

  const SizeMeasure m;
  const ArrivalKernel k;
};

// c with Psi(t) ~ c t^sigma as t -> inf, when the kernel admits it.
std::optional<double> leading_coefficient(const SizeMeasure& m, const ArrivalKernel& k);

std::shared_ptr<const PairModel> make_pair_model(const SizeMeasure& m, const ArrivalKernel& k);

}  // namespace crm::detail
