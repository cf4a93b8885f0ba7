#pragma once

// Conversions between the thermal parameters of a single bosonic mode in
// natural units (hbar*omega = k = 1):
//   tanh(theta) = exp(-1 / (2 tau)),   nbar = 1 / (exp(1/tau) - 1) = sinh^2(theta).
// tau = 0 is represented exactly as the vacuum (theta = 0, nbar = 0).

#include <cmath>
#include <string>

#include "tfdcool/errors.hpp"

namespace tfd {

inline double theta_from_tau(double tau) {
  if (!(tau >= 0.0)) throw DomainError("temperature must be >= 0, got " + std::to_string(tau));
  if (tau == 0.0) return 0.0;
  return std::atanh(std::exp(-0.5 / tau));
}

inline double tau_from_theta(double theta) {
  if (!(theta >= 0.0)) throw DomainError("theta must be >= 0, got " + std::to_string(theta));
  if (theta == 0.0) return 0.0;
  return -0.5 / std::log(std::tanh(theta));
}

inline double nbar_from_tau(double tau) {
  if (!(tau >= 0.0)) throw DomainError("temperature must be >= 0, got " + std::to_string(tau));
  if (tau == 0.0) return 0.0;
  return 1.0 / std::expm1(1.0 / tau);
}

inline double tau_from_nbar(double nbar) {
  if (!(nbar >= 0.0)) throw DomainError("mean photon number must be >= 0, got " + std::to_string(nbar));
  if (nbar == 0.0) return 0.0;
  return 1.0 / std::log1p(1.0 / nbar);
}

/// Population ratio q = exp(-1/tau) = tanh^2(theta) of the chaotic state.
inline double ratio_from_tau(double tau) {
  if (!(tau >= 0.0)) throw DomainError("temperature must be >= 0, got " + std::to_string(tau));
  return tau == 0.0 ? 0.0 : std::exp(-1.0 / tau);
}

/// Mutually consistent (theta, tau, nbar) triple.
class ThermoParams {
 public:
  static ThermoParams from_tau(double tau) { return ThermoParams(theta_from_tau(tau), tau, nbar_from_tau(tau)); }
  static ThermoParams from_theta(double theta) {
    const double tau = tau_from_theta(theta);
    const double s = std::sinh(theta);
    return ThermoParams(theta, tau, s * s);
  }
  static ThermoParams from_nbar(double nbar) {
    const double tau = tau_from_nbar(nbar);
    return ThermoParams(theta_from_tau(tau), tau, nbar);
  }

  double theta() const { return theta_; }
  double tau() const { return tau_; }
  double nbar() const { return nbar_; }
  bool is_zero_temperature() const { return tau_ == 0.0; }

  /// q = tanh^2(theta); exactly 0 at zero temperature.
  double ratio() const { return ratio_from_tau(tau_); }

 private:
  ThermoParams(double theta, double tau, double nbar) : theta_(theta), tau_(tau), nbar_(nbar) {}

  double theta_;
  double tau_;
  double nbar_;
};

}  // namespace tfd
