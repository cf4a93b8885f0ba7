#pragma once

// State constructors: the chaotic (thermal) field, its thermal-vacuum
// purification |0(beta)>, the thermo squeezing operator and the closed form
// of the purification after amplitude damping of the system mode.

#include <cmath>
#include <string>

#include "tfdcool/fock.hpp"
#include "tfdcool/temperature.hpp"

namespace tfd {

/// diag((1-q) q^n), q = exp(-1/tau). Truncation mass is kept visible unless
/// `renormalize` is set.
inline DensityMatrix chaotic_state(const ThermoParams& params, const ModeLayout& layout,
                                   bool renormalize = false) {
  if (layout.is_two_mode()) throw LayoutError("chaotic_state needs a single-mode layout");
  const int n = layout.cutoff();
  Matrix rho = Matrix::Zero(n, n);
  if (params.is_zero_temperature()) {
    rho(0, 0) = 1.0;
  } else {
    const double q = params.ratio();
    double pop = -std::expm1(-1.0 / params.tau());
    for (int k = 0; k < n; ++k, pop *= q) rho(k, k) = pop;
  }
  if (renormalize) rho /= rho.trace().real();
  return DensityMatrix(Operator(layout, std::move(rho)));
}

/// sech(theta) sum_n tanh^n(theta) |n, n~>.
inline PureState thermal_vacuum(const ThermoParams& params, const ModeLayout& layout) {
  if (!layout.is_two_mode()) throw LayoutError("thermal_vacuum needs a two-mode layout");
  Vector psi = Vector::Zero(layout.dim());
  if (params.is_zero_temperature()) {
    psi(0) = 1.0;
    return PureState(layout, std::move(psi));
  }
  const double t = std::exp(-0.5 / params.tau());
  double amp = std::sqrt(-std::expm1(-1.0 / params.tau()));
  for (int k = 0; k < layout.cutoff(); ++k, amp *= t) psi(layout.index(k, k)) = amp;
  return PureState(layout, std::move(psi));
}

/// exp[theta (a^dagger a~^dagger - a a~)] on the truncated two-mode space.
inline Operator thermo_squeeze_operator(double theta, const ModeLayout& layout) {
  if (!layout.is_two_mode()) throw LayoutError("thermo_squeeze_operator needs a two-mode layout");
  // theta (a^dagger a~^dagger - a a~), filled entrywise: dense products are
  // too slow at two-mode dimensions.
  const int n = layout.cutoff();
  Matrix gen = Matrix::Zero(layout.dim(), layout.dim());
  for (int s = 0; s + 1 < n; ++s)
    for (int t = 0; t + 1 < n; ++t) {
      const double w = theta * std::sqrt(static_cast<double>(s + 1) * (t + 1));
      gen(layout.index(s + 1, t + 1), layout.index(s, t)) = w;
      gen(layout.index(s, t), layout.index(s + 1, t + 1)) = -w;
    }
  return matrix_exponential(Operator(layout, std::move(gen)));
}

struct ExpectationPair {
  Complex pure_side;   // <0(beta)| A (x) I |0(beta)>
  Complex mixed_side;  // Tr(A rho_c)
};

inline ExpectationPair tfd_expectation_identity(const Operator& a, const ThermoParams& params) {
  if (a.layout().is_two_mode()) throw LayoutError("tfd_expectation_identity takes a single-mode operator");
  const auto doubled = ModeLayout::two_mode(a.layout().cutoff());
  const auto psi = thermal_vacuum(params, doubled);
  return {expectation(psi, embed(a, Mode::system)), expectation(chaotic_state(params, a.layout()), a)};
}

/// Parameters of the damped purification: squeeze amplitude lambda and the
/// chaotic weight mu that the tilde vacuum acquires.
struct EvolvedTwoModeSpec {
  double theta;
  double kappa_t;
  double lambda;  // e^{-kt} tanh(theta)
  double mu;      // (1 - e^{-2kt}) tanh^2(theta)

  static EvolvedTwoModeSpec make(double theta, double kappa_t) {
    if (!(theta >= 0.0)) throw DomainError("theta must be >= 0");
    if (!(kappa_t >= 0.0)) throw DomainError("kappa*t must be >= 0, got " + std::to_string(kappa_t));
    const double t = std::tanh(theta);
    return {theta, kappa_t, std::exp(-kappa_t) * t, -std::expm1(-2.0 * kappa_t) * t * t};
  }
};

enum class PairConstruction {
  series,       // E|0,m~> expanded term by term
  exponential,  // E = matrix_exponential(lambda a^dagger a~^dagger)
};

/// sech^2(theta) E (|0><0| (x) diag(mu^m)) E^dagger with E = exp(lambda a^dagger a~^dagger).
inline DensityMatrix evolved_two_mode_state(const EvolvedTwoModeSpec& spec, const ModeLayout& layout,
                                            PairConstruction how = PairConstruction::series,
                                            double max_trace_deficit = 1e-6) {
  if (!layout.is_two_mode()) throw LayoutError("evolved_two_mode_state needs a two-mode layout");
  if (!(spec.mu >= 0.0 && spec.mu < 1.0)) throw DomainError("tilde chaotic weight must lie in [0, 1)");
  const int n = layout.cutoff();
  const double sech = 1.0 / std::cosh(spec.theta);
  Matrix rho;

  if (how == PairConstruction::series) {
    // Column m holds sech * mu^{m/2} * E|0, m~>, and
    // E|0, m~> = sum_j lambda^j sqrt(C(m+j, j)) |j, (m+j)~>.
    Matrix cols = Matrix::Zero(layout.dim(), n);
    for (int m = 0; m < n; ++m) {
      const double head = sech * std::pow(spec.mu, 0.5 * m);
      double binom = 1.0;  // C(m+j, j)
      for (int j = 0; m + j < n; ++j) {
        if (j > 0) binom *= static_cast<double>(m + j) / j;
        cols(layout.index(j, m + j), m) = head * std::pow(spec.lambda, j) * std::sqrt(binom);
      }
    }
    rho = cols * cols.adjoint();
  } else {
    const Operator pair = dagger(annihilation(layout, Mode::system)) * dagger(annihilation(layout, Mode::tilde));
    const Matrix e = matrix_exponential(scale(pair, spec.lambda)).matrix();
    Eigen::VectorXd middle = Eigen::VectorXd::Zero(layout.dim());
    for (int m = 0; m < n; ++m) middle(layout.index(0, m)) = std::pow(spec.mu, m);
    rho = (sech * sech) * e * middle.asDiagonal() * e.adjoint();
  }

  auto state = DensityMatrix::hermitized(layout, rho);
  const double deficit = 1.0 - state.trace();
  if (deficit > max_trace_deficit)
    throw TruncationError("cutoff " + std::to_string(n) + " too small for evolved two-mode state (trace deficit " +
                          std::to_string(deficit) + ")");
  return state;
}

}  // namespace tfd
