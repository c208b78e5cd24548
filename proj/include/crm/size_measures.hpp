#pragma once

#include <optional>
#include <string>

namespace crm {

enum class ProcessFamily { GGP, Stable, GammaProcess, SBP, BetaProcess, TransformedBP };

// rho(w) ~ zeta0 w^{-1-sigma} as w -> 0.
struct RegularVariationData {
  double sigma;
  double zeta0;
};

// Levy intensity rho(dw) of a homogeneous CRM.
//   GGP:            alpha / Gamma(1-sigma) w^{-1-sigma} e^{-tau w}
//   Stable:         GGP with tau = 0
//   GammaProcess:   GGP with sigma = 0
//   SBP:            alpha / B(1-sigma, c+sigma) w^{-1-sigma} (1-w)^{c+sigma-1} on (0,1)
//   BetaProcess:    alpha w^{-1} on (0,1)
//   TransformedBP:  u^{-2} on (0,inf), the beta process after u = -1/(alpha log w)
class SizeMeasure {
 public:
  static SizeMeasure ggp(double alpha, double sigma, double tau);
  static SizeMeasure stable(double alpha, double sigma);
  static SizeMeasure gamma_process(double alpha, double tau);
  static SizeMeasure sbp(double alpha, double sigma, double c);
  static SizeMeasure beta_process(double alpha);
  static SizeMeasure transformed_bp(double alpha);

  ProcessFamily family() const { return family_; }
  double alpha() const { return alpha_; }
  double sigma() const { return sigma_; }
  double tau() const { return tau_; }
  double c() const { return c_; }
  double upper_support() const;  // 1 for SBP/BetaProcess, inf otherwise
  // True for the GGP family (GGP, Stable, GammaProcess).
  bool is_ggp() const;

  double density(double w) const;
  double log_density(double w) const;  // -inf outside the support
  // rho-bar(x) = int_x^inf rho(dw)
  double tail_intensity(double x) const;
  // Generalized inverse inf{x : rho-bar(x) <= y}.
  double inverse_tail(double y) const;
  std::optional<RegularVariationData> regular_variation() const;
  // Total mass int rho(dw) (finite only for sigma < 0 GGP).
  double total_mass() const;

  // Maps a simulated point to the CRM weight: identity except for
  // TransformedBP, where u -> e^{-1/(alpha u)}.
  double weight_from_point(double u) const;

  std::string name() const;      // e.g. "ggp(alpha=2,sigma=0.5,tau=1)"
  std::string family_name() const;

 private:
  SizeMeasure(ProcessFamily f, double alpha, double sigma, double tau, double c)
      : family_(f), alpha_(alpha), sigma_(sigma), tau_(tau), c_(c) {}
  double log_norm() const;

  ProcessFamily family_;
  double alpha_;
  double sigma_;
  double tau_;
  double c_;
};

}  // namespace crm
