#pragma once

// Zero-temperature amplitude damping, d rho/dt = kappa (2 a rho a^dagger - a^dagger a rho - rho a^dagger a),
// both through its exact operator-sum solution and through fixed-step RK4.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tfdcool/fock.hpp"

namespace tfd {

struct ChannelSpec {
  double kappa_t = 0.0;
  int max_kraus = 0;  // 0: use the cutoff N
  Mode target = Mode::system;

  /// V = 1 - e^{-2 kappa t}.
  double damping_weight() const { return -std::expm1(-2.0 * kappa_t); }
};

namespace detail {

inline void check_channel(const ChannelSpec& spec, const ModeLayout& layout) {
  if (!(spec.kappa_t >= 0.0)) throw DomainError("kappa*t must be >= 0, got " + std::to_string(spec.kappa_t));
  if (spec.max_kraus < 0) throw DomainError("max_kraus must be positive");
  layout.require(spec.target);
}

inline int kraus_count(const ChannelSpec& spec, const ModeLayout& layout) {
  return spec.max_kraus == 0 ? layout.cutoff() : std::min(spec.max_kraus, layout.cutoff());
}

/// coeff[n][i] = <i| K_n |i+n> = sqrt(C(i+n, n) V^n) e^{-kappa t i} on the target mode.
inline std::vector<std::vector<double>> kraus_coefficients(const ChannelSpec& spec, int cutoff, int count) {
  const double log_v = std::log(spec.damping_weight());
  std::vector<std::vector<double>> coeff(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    auto& row = coeff[n];
    row.resize(static_cast<std::size_t>(cutoff - n));
    double binom = 1.0;  // C(i+n, n)
    for (int i = 0; i + n < cutoff; ++i) {
      if (i > 0) binom *= static_cast<double>(i + n) / i;
      if (n == 0) {
        row[i] = std::exp(-spec.kappa_t * i);
      } else if (spec.kappa_t == 0.0) {
        row[i] = 0.0;
      } else {
        row[i] = std::exp(0.5 * (std::log(binom) + n * log_v) - spec.kappa_t * i);
      }
    }
  }
  return coeff;
}

}  // namespace detail

/// K_n = sqrt(V^n / n!) e^{-kappa t a^dagger a} a^n, n = 0..max_kraus-1, on the target mode.
inline std::vector<Operator> kraus_operators(const ChannelSpec& spec, const ModeLayout& layout) {
  detail::check_channel(spec, layout);
  const int count = detail::kraus_count(spec, layout);
  const auto coeff = detail::kraus_coefficients(spec, layout.cutoff(), count);
  const Index step = layout.stride(spec.target);
  std::vector<Operator> ops;
  ops.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    Matrix k = Matrix::Zero(layout.dim(), layout.dim());
    for (Index row = 0; row < layout.dim(); ++row) {
      const int level = layout.level(row, spec.target);
      if (level + n < layout.cutoff()) k(row, row + n * step) = coeff[n][level];
    }
    ops.emplace_back(layout, std::move(k));
  }
  return ops;
}

/// sum_n K_n rho K_n^dagger. Each K_n shifts the target level by n, so the
/// sum is evaluated entrywise instead of through dense products.
inline DensityMatrix apply_kraus(const DensityMatrix& rho, const ChannelSpec& spec) {
  const auto& layout = rho.layout();
  detail::check_channel(spec, layout);
  const int count = detail::kraus_count(spec, layout);
  const auto coeff = detail::kraus_coefficients(spec, layout.cutoff(), count);
  const Index dim = layout.dim();
  const Index step = layout.stride(spec.target);
  const int cutoff = layout.cutoff();
  const Matrix& in = rho.matrix();

  std::vector<int> level(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) level[i] = layout.level(i, spec.target);

  Matrix out = Matrix::Zero(dim, dim);
  for (int n = 0; n < count; ++n) {
    const auto& c = coeff[n];
    const Index shift = n * step;
    for (Index col = 0; col < dim; ++col) {
      if (level[col] + n >= cutoff) continue;
      const double c_col = c[level[col]];
      if (c_col == 0.0) continue;
      for (Index row = 0; row < dim; ++row) {
        if (level[row] + n >= cutoff) continue;
        out(row, col) += (c[level[row]] * c_col) * in(row + shift, col + shift);
      }
    }
  }
  return DensityMatrix::hermitized(layout, out);
}

/// kappa (2 a rho a^dagger - a^dagger a rho - rho a^dagger a) with a acting on `target`.
inline Operator lindblad_rhs(const Operator& rho, double kappa, Mode target = Mode::system) {
  const auto& layout = rho.layout();
  layout.require(target);
  const Index dim = layout.dim();
  const Index step = layout.stride(target);
  const int cutoff = layout.cutoff();
  const Matrix& in = rho.matrix();
  Matrix out(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    const int lc = layout.level(col, target);
    for (Index row = 0; row < dim; ++row) {
      const int lr = layout.level(row, target);
      Complex v = -static_cast<double>(lr + lc) * in(row, col);
      if (lr + 1 < cutoff && lc + 1 < cutoff)
        v += 2.0 * std::sqrt(static_cast<double>(lr + 1) * (lc + 1)) * in(row + step, col + step);
      out(row, col) = kappa * v;
    }
  }
  return Operator(layout, std::move(out));
}

inline Operator lindblad_rhs(const DensityMatrix& rho, double kappa, Mode target = Mode::system) {
  return lindblad_rhs(rho.op(), kappa, target);
}

/// One classical fourth-order Runge-Kutta step of dy/dt = f(y) for an
/// autonomous right-hand side.
template <class State, class Rhs>
State rk4_step(const State& y, double dt, Rhs&& f) {
  const State k1 = f(y);
  const State k2 = f(y + (0.5 * dt) * k1);
  const State k3 = f(y + (0.5 * dt) * k2);
  const State k4 = f(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct IntegrationOptions {
  double dt = 0.0;  // 0: min(1e-3 / kappa, t_final / 100)
  Mode target = Mode::system;
  double max_trace_drift = 1e-6;
};

inline double default_time_step(double kappa, double t_final) {
  const double by_span = t_final / 100.0;
  return kappa > 0.0 ? std::min(1e-3 / kappa, by_span) : by_span;
}

/// Fixed-step RK4 solution of the damping master equation. The last step is
/// shortened to land on t_final; the state is re-Hermitized after every step.
inline DensityMatrix lindblad_integrate(const DensityMatrix& rho0, double kappa, double t_final,
                                        const IntegrationOptions& opts = {}) {
  if (!(kappa >= 0.0)) throw DomainError("decay rate must be >= 0");
  if (!(t_final >= 0.0)) throw DomainError("final time must be >= 0");
  rho0.layout().require(opts.target);
  if (t_final == 0.0) return rho0;
  const double dt = opts.dt > 0.0 ? opts.dt : default_time_step(kappa, t_final);
  if (!(dt > 0.0)) throw DomainError("time step must be > 0");

  const auto& layout = rho0.layout();
  auto rhs = [&](const Matrix& m) -> Matrix { return lindblad_rhs(Operator(layout, m), kappa, opts.target).matrix(); };

  auto full_steps = static_cast<long>(std::floor(t_final / dt));
  double last = t_final - static_cast<double>(full_steps) * dt;
  if (last <= 1e-12 * t_final) {
    last = 0.0;
  }
  const double trace0 = rho0.trace();
  Matrix rho = rho0.matrix();
  double t = 0.0;
  auto advance = [&](double h) {
    rho = rk4_step(rho, h, rhs);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    t += h;
    const double drift = std::abs(rho.trace().real() - trace0);
    if (!(drift <= opts.max_trace_drift)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "trace drift %.3e at t = %.6g exceeds %.3e", drift, t, opts.max_trace_drift);
      throw IntegrationError(buf);
    }
  };
  for (long s = 0; s < full_steps; ++s) advance(dt);
  if (last > 0.0) advance(last);
  return DensityMatrix::hermitized(layout, rho);
}

}  // namespace tfd
