#pragma once

// Temperature of a chaotic field under amplitude damping: the closed-form
// cooling law, temperature extraction from a numerical state, and cooling
// curves that compare the two.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "tfdcool/channel.hpp"
#include "tfdcool/fock.hpp"
#include "tfdcool/states.hpp"
#include "tfdcool/temperature.hpp"

namespace tfd {

namespace detail {

inline void check_kappa_t(double kappa_t) {
  if (!(kappa_t >= 0.0)) throw DomainError("kappa*t must be >= 0, got " + std::to_string(kappa_t));
}

}  // namespace detail

/// tanh(theta') = e^{-kt} tanh(theta) / sqrt(1 - (1 - e^{-2kt}) tanh^2(theta)).
/// Also asserts sech^2(theta') = 1 / (1 + e^{-2kt} sinh^2(theta)).
inline double theta_prime(double theta, double kappa_t) {
  if (!(theta >= 0.0)) throw DomainError("theta must be >= 0");
  detail::check_kappa_t(kappa_t);
  const double t = std::tanh(theta);
  const double v = -std::expm1(-2.0 * kappa_t);
  const double tp = std::exp(-kappa_t) * t / std::sqrt(1.0 - v * t * t);
  const double result = std::atanh(tp);

  const double s = std::sinh(theta);
  const double sech2_direct = 1.0 - tp * tp;
  const double sech2_closed = 1.0 / (1.0 + std::exp(-2.0 * kappa_t) * s * s);
  if (std::abs(sech2_direct - sech2_closed) > 1e-12 * std::max(1.0, sech2_closed))
    throw std::logic_error("sech^2(theta') identity violated");
  return result;
}

/// Temperature after damping for time kappa*t:
///   tau' = -1 / ln( e^{-2kt} q / (1 - (1 - e^{-2kt}) q) ),  q = e^{-1/tau0}.
inline double tau_after(double tau0, double kappa_t) {
  if (!(tau0 > 0.0)) throw DomainError("initial temperature must be > 0, got " + std::to_string(tau0));
  detail::check_kappa_t(kappa_t);
  if (kappa_t == 0.0) return tau0;
  const double q = std::exp(-1.0 / tau0);
  // ln(argument) = -2kt - 1/tau0 - ln(1 + expm1(-2kt) q)
  const double log_arg = -2.0 * kappa_t - 1.0 / tau0 - std::log1p(std::expm1(-2.0 * kappa_t) * q);
  return -1.0 / log_arg;
}

struct GeometricFit {
  double q = 0.0;
  double nbar = 0.0;
  double max_offdiag = 0.0;
  double max_ratio_residual = 0.0;
};

struct FitOptions {
  double off_diag_tol = 1e-10;
  double population_floor = 1e-10;
};

/// Fit rho ~ diag((1-q) q^n). q is the population-weighted mean of the
/// successive ratios rho[n+1,n+1]/rho[n,n] over levels above the floor.
inline GeometricFit fit_geometric(const DensityMatrix& rho, const FitOptions& opts = {}) {
  if (rho.layout().is_two_mode()) throw LayoutError("fit_geometric needs a single-mode state");
  const Matrix& m = rho.matrix();
  const Index n = m.rows();
  GeometricFit fit;
  fit.max_offdiag = max_abs(m - Matrix(m.diagonal().asDiagonal()));
  if (!(fit.max_offdiag < opts.off_diag_tol)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "state is not diagonal (max off-diagonal %.3e)", fit.max_offdiag);
    throw NotChaoticError(buf);
  }
  double num = 0.0;
  double den = 0.0;
  for (Index k = 0; k + 1 < n; ++k) {
    const double p = m(k, k).real();
    if (p > opts.population_floor) {
      num += m(k + 1, k + 1).real();
      den += p;
    }
  }
  if (den == 0.0 || num <= 0.0) return fit;  // zero temperature
  fit.q = num / den;
  if (!(fit.q < 1.0)) throw NotChaoticError("population ratio >= 1: no finite temperature");
  for (Index k = 0; k + 1 < n; ++k) {
    const double p = m(k, k).real();
    if (p > opts.population_floor)
      fit.max_ratio_residual = std::max(fit.max_ratio_residual, std::abs(m(k + 1, k + 1).real() / p - fit.q));
  }
  fit.nbar = fit.q / (1.0 - fit.q);
  return fit;
}

inline double effective_temperature(const DensityMatrix& rho, const FitOptions& opts = {}) {
  const auto fit = fit_geometric(rho, opts);
  return fit.q == 0.0 ? 0.0 : tau_from_nbar(fit.nbar);
}

struct CoolingPoint {
  double kappa_t = 0.0;
  double tau_closed = 0.0;
  std::optional<double> tau_numeric;  // empty for EvolutionMethod::closed_only
  double nbar = 0.0;
  double trace_error = 0.0;
};

enum class EvolutionMethod { kraus, lindblad, closed_only };

struct CurveOptions {
  int cutoff = 0;   // 0: tail rule on the initial state
  double dt = 0.0;  // Lindblad step; 0 uses default_time_step
};

inline int auto_cutoff(double tau0) { return select_cutoff(ratio_from_tau(tau0)); }

/// One CoolingPoint per time, each evolved independently from the initial
/// chaotic state; points are returned in input order.
inline std::vector<CoolingPoint> cooling_curve(double tau0, double kappa, const std::vector<double>& times,
                                               EvolutionMethod method, const CurveOptions& opts = {}) {
  if (!(tau0 > 0.0)) throw DomainError("initial temperature must be > 0");
  if (!(kappa >= 0.0)) throw DomainError("decay rate must be >= 0");
  const int cutoff = opts.cutoff > 0 ? opts.cutoff : auto_cutoff(tau0);
  const auto layout = ModeLayout::single(cutoff);
  const auto rho0 = chaotic_state(ThermoParams::from_tau(tau0), layout);
  const auto num = number(layout, Mode::system);

  std::vector<CoolingPoint> points;
  points.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) throw DomainError("times must be >= 0");
    CoolingPoint p;
    p.kappa_t = kappa * t;
    p.tau_closed = tau_after(tau0, p.kappa_t);
    if (method == EvolutionMethod::closed_only) {
      p.nbar = nbar_from_tau(p.tau_closed);
      points.push_back(p);
      continue;
    }
    auto rethrow = [&](const auto& e) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "at kappa*t = %.12g: ", p.kappa_t);
      using E = std::decay_t<decltype(e)>;
      throw E(buf + std::string(e.what()));
    };
    try {
      const auto rho = method == EvolutionMethod::kraus
                           ? apply_kraus(rho0, ChannelSpec{p.kappa_t})
                           : lindblad_integrate(rho0, kappa, t, IntegrationOptions{opts.dt});
      p.tau_numeric = effective_temperature(rho);
      p.nbar = expectation(rho, num).real();
      p.trace_error = std::abs(rho.trace() - 1.0);
    } catch (const NotChaoticError& e) {
      rethrow(e);
    } catch (const IntegrationError& e) {
      rethrow(e);
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace tfd
