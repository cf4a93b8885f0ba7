#pragma once

// Invariant suites behind `tfdcool verify`. Each check produces an observed
// deviation; it passes iff observed < tolerance (so a tolerance of 0 always
// fails). Tolerances can be overridden by check name.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tfdcool/channel.hpp"
#include "tfdcool/fock.hpp"
#include "tfdcool/states.hpp"
#include "tfdcool/thermo.hpp"

namespace tfd::verify {

struct CheckResult {
  std::string suite;
  std::string name;
  double observed;
  double tolerance;
  bool pass;
  std::string error;  // set when the check threw
};

struct Check {
  std::string name;
  double tolerance;
  std::function<double()> observe;
};

struct SuiteConfig {
  std::optional<int> cutoff;  // single-mode cutoff; two-mode checks clamp it to 48
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"fock", "states", "channel", "thermo"};
  return names;
}

namespace detail {

inline Matrix random_matrix(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = Complex(u(gen), u(gen));
  return m;
}

inline DensityMatrix random_density(Index n, std::uint64_t seed) {
  const Matrix g = random_matrix(n, seed);
  const Matrix p = g * g.adjoint();
  return DensityMatrix::hermitized(ModeLayout::single(static_cast<int>(n)), p / p.trace().real());
}

inline double count(bool violated) { return violated ? 1.0 : 0.0; }

const std::vector<double> kTauGrid{0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.5, 5.0, 10.0};
const std::vector<double> kKtGrid{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};

inline std::vector<Check> fock_checks(const SuiteConfig& cfg) {
  const int n = cfg.cutoff.value_or(16);
  const auto one = ModeLayout::single(n);
  std::vector<Check> checks;
  checks.push_back({"ladder_commutator_interior", 1e-12, [=] {
                      const auto a = annihilation(one, Mode::system);
                      const Matrix c = (a * dagger(a) - dagger(a) * a).matrix();
                      return max_abs(c.topLeftCorner(n - 1, n - 1) - Matrix::Identity(n - 1, n - 1));
                    }});
  checks.push_back({"creation_is_dagger", 1e-14, [=] {
                      const auto two = ModeLayout::two_mode(std::min(n, 12));
                      double worst = 0.0;
                      for (auto mode : {Mode::system, Mode::tilde})
                        worst = std::max(worst, max_abs(creation(two, mode).matrix() -
                                                        annihilation(two, mode).matrix().adjoint()));
                      return worst;
                    }});
  checks.push_back({"number_is_creation_times_annihilation", 1e-12, [=] {
                      const auto a = annihilation(one, Mode::system);
                      return max_abs((dagger(a) * a).matrix() - number(one, Mode::system).matrix());
                    }});
  checks.push_back({"tensor_trace_factorizes", 1e-10, [=] {
                      const int m = std::min(n, 12);
                      const Operator x(ModeLayout::single(m), random_matrix(m, 11));
                      const Operator y(ModeLayout::single(m), random_matrix(m, 12));
                      return std::abs(trace(tensor(x, y)) - trace(x) * trace(y));
                    }});
  checks.push_back({"partial_trace_of_product_state", 1e-12, [=] {
                      const int m = std::min(n, 12);
                      const auto ra = random_density(m, 21);
                      const auto rb = random_density(m, 22);
                      const auto joint = product_state(ra, rb);
                      return std::max(max_abs(partial_trace(joint, Mode::tilde).matrix() - ra.matrix()),
                                      max_abs(partial_trace(joint, Mode::system).matrix() - rb.matrix()));
                    }});
  checks.push_back({"partial_trace_preserves_trace", 1e-12, [=] {
                      const int m = std::min(n, 8);
                      const auto rho = random_density(Index{m} * m, 31);
                      const DensityMatrix joint(Operator(ModeLayout::two_mode(m), rho.matrix()));
                      return std::max(std::abs(partial_trace(joint, Mode::tilde).trace() - joint.trace()),
                                      std::abs(partial_trace(joint, Mode::system).trace() - joint.trace()));
                    }});
  checks.push_back({"dagger_involution", 1e-15, [=] {
                      const Operator x(one, random_matrix(n, 41));
                      return max_abs(dagger(dagger(x)).matrix() - x.matrix());
                    }});
  checks.push_back({"trace_cyclicity", 1e-12, [=] {
                      const Operator x(one, random_matrix(n, 51));
                      const Operator y(one, random_matrix(n, 52));
                      const double scale_ = std::max(1.0, std::abs(trace(x * y)));
                      return std::abs(trace(x * y) - trace(y * x)) / scale_;
                    }});
  checks.push_back({"exponential_of_diagonal", 1e-12, [=] {
                      Matrix d = Matrix::Zero(n, n);
                      for (int k = 0; k < n; ++k) d(k, k) = Complex(0.1 * k - 0.5, 0.05 * k);
                      Matrix expected = Matrix::Zero(n, n);
                      for (int k = 0; k < n; ++k) expected(k, k) = std::exp(d(k, k));
                      return std::max(max_abs(matrix_exponential(Operator(one, d)).matrix() - expected),
                                      max_abs(matrix_exponential(Operator::zero(one)).matrix() -
                                              Matrix::Identity(n, n)));
                    }});
  checks.push_back({"trace_distance_orthogonal_pure", 1e-12, [=] {
                      const auto p0 = outer(PureState::basis(one, 0));
                      const auto p1 = outer(PureState::basis(one, 1));
                      return std::abs(trace_distance(p0, p1) - 1.0) + trace_distance(p0, p0);
                    }});
  return checks;
}

inline int two_mode_cutoff(const SuiteConfig& cfg, double ratio, int fallback_max) {
  if (cfg.cutoff) return std::min(*cfg.cutoff, 48);
  return select_cutoff(ratio, 8, fallback_max);
}

inline std::vector<Check> states_checks(const SuiteConfig& cfg) {
  const auto params = ThermoParams::from_tau(1.0);
  const int n = two_mode_cutoff(cfg, params.ratio(), 48);
  const int n_small = cfg.cutoff ? std::min(*cfg.cutoff, 24) : 24;
  const auto two = ModeLayout::two_mode(n);
  const auto one = ModeLayout::single(n);
  std::vector<Check> checks;
  checks.push_back({"tfd_partial_trace_tilde", 1e-10, [=] {
                      double worst = 0.0;
                      for (double tau : {0.3, 1.0, 3.0}) {
                        const auto p = ThermoParams::from_tau(tau);
                        const int m = select_cutoff(p.ratio());
                        const auto psi = thermal_vacuum(p, ModeLayout::two_mode(m));
                        worst = std::max(worst, max_abs(partial_trace(psi, Mode::tilde).matrix() -
                                                        chaotic_state(p, ModeLayout::single(m)).matrix()));
                      }
                      return worst;
                    }});
  checks.push_back({"tfd_partial_trace_system_symmetric", 1e-10, [=] {
                      const auto rho = outer(thermal_vacuum(params, two));
                      return max_abs(partial_trace(rho, Mode::system).matrix() - chaotic_state(params, one).matrix());
                    }});
  checks.push_back({"thermal_vacuum_mean_photon_sinh2", 1e-10, [=] {
                      const auto psi = thermal_vacuum(params, two);
                      const double s = std::sinh(params.theta());
                      return std::abs(expectation(psi, number(two, Mode::system)).real() - s * s);
                    }});
  checks.push_back({"squeeze_operator_on_vacuum", 1e-7, [=] {
                      const auto s = thermo_squeeze_operator(params.theta(), two);
                      const Vector squeezed = s.matrix().col(0);
                      return max_abs(squeezed - thermal_vacuum(params, two).amplitudes());
                    }});
  checks.push_back({"tfd_expectation_identity_number", 1e-12, [=] {
                      const auto pair = tfd_expectation_identity(number(one, Mode::system), params);
                      return std::abs(pair.pure_side - pair.mixed_side);
                    }});
  checks.push_back({"evolved_state_at_zero_time", 1e-10, [=] {
                      const auto small = ModeLayout::two_mode(n_small);
                      const auto rho = evolved_two_mode_state(EvolvedTwoModeSpec::make(params.theta(), 0.0), small);
                      return max_abs(rho.matrix() - outer(thermal_vacuum(params, small)).matrix());
                    }});
  checks.push_back({"evolved_state_vs_kraus", 1e-8, [=] {
                      const auto small = ModeLayout::two_mode(n_small);
                      const auto rho0 = outer(thermal_vacuum(params, small));
                      double worst = 0.0;
                      for (double kt : {0.2, 1.0}) {
                        const auto analytic = evolved_two_mode_state(EvolvedTwoModeSpec::make(params.theta(), kt), small);
                        worst = std::max(worst, trace_distance(analytic, apply_kraus(rho0, ChannelSpec{kt})));
                      }
                      return worst;
                    }});
  checks.push_back({"evolved_series_vs_exponential", 1e-10, [=] {
                      const auto small = ModeLayout::two_mode(std::min(n_small, 16));
                      const auto spec = EvolvedTwoModeSpec::make(params.theta(), 0.5);
                      return max_abs(evolved_two_mode_state(spec, small, PairConstruction::series).matrix() -
                                     evolved_two_mode_state(spec, small, PairConstruction::exponential).matrix());
                    }});
  checks.push_back({"reservoir_reduced_state_invariant", 1e-8, [=] {
                      const auto small = ModeLayout::two_mode(n_small);
                      const auto ref = chaotic_state(params, small.single_mode());
                      double worst = 0.0;
                      for (double kt : {0.0, 0.3, 1.0, 5.0}) {
                        const auto rho = evolved_two_mode_state(EvolvedTwoModeSpec::make(params.theta(), kt), small);
                        worst = std::max(worst, max_abs(partial_trace(rho, Mode::system).matrix() - ref.matrix()));
                      }
                      return worst;
                    }});
  checks.push_back({"reduced_state_purity", 1e-8, [=] {
                      const auto reduced = partial_trace(thermal_vacuum(params, two), Mode::tilde);
                      return std::abs(purity(reduced) - 1.0 / std::cosh(2.0 * params.theta()));
                    }});
  return checks;
}

inline std::vector<Check> channel_checks(const SuiteConfig& cfg) {
  const int n = cfg.cutoff.value_or(32);
  const auto one = ModeLayout::single(n);
  const auto rho_c = chaotic_state(ThermoParams::from_tau(1.0), one);
  std::vector<Check> checks;
  checks.push_back({"kraus_completeness", 1e-10, [=] {
                      double worst = 0.0;
                      for (double kt : {0.1, 0.5, 2.0}) {
                        Matrix sum = Matrix::Zero(n, n);
                        for (const auto& k : kraus_operators(ChannelSpec{kt}, one)) sum += k.matrix().adjoint() * k.matrix();
                        worst = std::max(worst, max_abs(sum - Matrix::Identity(n, n)));
                      }
                      return worst;
                    }});
  checks.push_back({"kraus_vacuum_fixed_point", 1e-14, [=] {
                      const auto vac = outer(PureState::basis(one, 0));
                      return max_abs(apply_kraus(vac, ChannelSpec{0.7}).matrix() - vac.matrix());
                    }});
  checks.push_back({"kraus_vs_lindblad", 1e-6, [=] {
                      const auto kraus = apply_kraus(rho_c, ChannelSpec{0.5});
                      const auto rk4 = lindblad_integrate(rho_c, 1.0, 0.5, IntegrationOptions{1e-3});
                      return trace_distance(kraus, rk4);
                    }});
  checks.push_back({"kraus_composition", 1e-9, [=] {
                      const auto rho = detail::random_density(n, 61);
                      const auto twice = apply_kraus(apply_kraus(rho, ChannelSpec{0.3}), ChannelSpec{0.4});
                      return max_abs(twice.matrix() - apply_kraus(rho, ChannelSpec{0.7}).matrix());
                    }});
  checks.push_back({"mean_photon_decay", 1e-8, [=] {
                      const auto num = number(one, Mode::system);
                      double worst = 0.0;
                      for (const auto& rho : {rho_c, outer(PureState::basis(one, 2)), detail::random_density(n, 71)}) {
                        const double before = expectation(rho, num).real();
                        for (double kt : {0.1, 0.5, 2.0}) {
                          const double after = expectation(apply_kraus(rho, ChannelSpec{kt}), num).real();
                          worst = std::max(worst, std::abs(after - std::exp(-2.0 * kt) * before));
                        }
                      }
                      return worst;
                    }});
  checks.push_back({"chaotic_family_closure", 1e-8, [=] {
                      // The truncated tail feeds the lowest levels; 64 levels push it below round-off.
                      const auto wide = ModeLayout::single(std::max(n, 64));
                      const auto rho = chaotic_state(ThermoParams::from_tau(1.0), wide);
                      return fit_geometric(apply_kraus(rho, ChannelSpec{0.5})).max_ratio_residual;
                    }});
  checks.push_back({"two_mode_locality", 1e-9, [=] {
                      const auto two = ModeLayout::two_mode(std::min(n, 16));
                      const auto rho = outer(thermal_vacuum(ThermoParams::from_tau(0.6), two));
                      const auto evolved = apply_kraus(rho, ChannelSpec{0.8});
                      return max_abs(partial_trace(evolved, Mode::system).matrix() -
                                     partial_trace(rho, Mode::system).matrix());
                    }});
  checks.push_back({"lindblad_semigroup", 1e-8, [=] {
                      const IntegrationOptions opts{1e-3};
                      const auto split = lindblad_integrate(lindblad_integrate(rho_c, 1.0, 0.2, opts), 1.0, 0.3, opts);
                      return trace_distance(split, lindblad_integrate(rho_c, 1.0, 0.5, opts));
                    }});
  checks.push_back({"lindblad_rhs_traceless", 1e-12, [=] {
                      return std::abs(trace(lindblad_rhs(detail::random_density(n, 81), 1.3)));
                    }});
  return checks;
}

inline std::vector<Check> thermo_checks(const SuiteConfig& cfg) {
  const std::optional<int> cutoff = cfg.cutoff;
  std::vector<Check> checks;
  checks.push_back({"eq32_vs_nbar_oracle", 1e-12, [] {
                      double worst = 0.0;
                      for (double tau : kTauGrid)
                        for (double kt : kKtGrid) {
                          const double oracle = tau_from_nbar(std::exp(-2.0 * kt) * nbar_from_tau(tau));
                          worst = std::max(worst, std::abs(tau_after(tau, kt) - oracle));
                        }
                      return worst;
                    }});
  checks.push_back({"theta_tau_round_trip", 1e-12, [] {
                      double worst = 0.0;
                      for (double tau : kTauGrid) worst = std::max(worst, std::abs(tau_from_theta(theta_from_tau(tau)) - tau));
                      return worst;
                    }});
  checks.push_back({"nbar_is_sinh2_theta", 1e-12, [] {
                      double worst = 0.0;
                      for (double tau : {0.2, 1.0, 5.0}) {
                        const double s = std::sinh(theta_from_tau(tau));
                        worst = std::max(worst, std::abs(s * s - nbar_from_tau(tau)));
                      }
                      return worst;
                    }});
  checks.push_back({"sech2_theta_prime_identity", 1e-12, [] {
                      double worst = 0.0;
                      for (double tau : kTauGrid)
                        for (double kt : kKtGrid) {
                          const double theta = theta_from_tau(tau);
                          const double c = std::cosh(theta_prime(theta, kt));
                          const double s = std::sinh(theta);
                          worst = std::max(worst, std::abs(1.0 / (c * c) - 1.0 / (1.0 + std::exp(-2.0 * kt) * s * s)));
                        }
                      return worst;
                    }});
  checks.push_back({"cooling_positive_and_monotone", 0.5, [] {
                      double violations = 0.0;
                      for (double tau : kTauGrid) {
                        double previous = tau;
                        for (double kt : kKtGrid) {
                          const double t = tau_after(tau, kt);
                          violations += count(!(t > 0.0) || !(t < tau) || !(t < previous));
                          previous = t;
                        }
                      }
                      return violations;
                    }});
  checks.push_back({"cooling_denominator_bound", 0.5, [] {
                      double violations = 0.0;
                      for (double tau : kTauGrid)
                        for (double kt : kKtGrid) {
                          const double q = ratio_from_tau(tau);
                          violations += count(!(1.0 + std::expm1(-2.0 * kt) * q > std::exp(-2.0 * kt)));
                        }
                      return violations;
                    }});
  checks.push_back({"cooling_semigroup", 1e-10, [] {
                      double worst = 0.0;
                      for (double tau : {0.3, 1.0, 4.0})
                        for (double x : {0.1, 0.5})
                          for (double y : {0.2, 1.5}) worst = std::max(worst, std::abs(tau_after(tau_after(tau, x), y) - tau_after(tau, x + y)));
                      return worst;
                    }});
  checks.push_back({"asymptote_kt30", 0.02, [] {
                      double worst = 0.0;
                      for (double tau : kTauGrid) worst = std::max(worst, tau_after(tau, 30.0));
                      return worst;
                    }});
  checks.push_back({"closed_vs_kraus", 1e-7, [cutoff] {
                      double worst = 0.0;
                      const std::vector<double> times{0.1, 0.5, 1.0, 2.0};
                      for (double tau : {0.5, 1.0, 2.0})
                        for (const auto& p : cooling_curve(tau, 1.0, times, EvolutionMethod::kraus, {cutoff.value_or(48)}))
                          worst = std::max(worst, std::abs(p.tau_closed - *p.tau_numeric));
                      return worst;
                    }});
  checks.push_back({"closed_vs_lindblad", 1e-5, [cutoff] {
                      double worst = 0.0;
                      const std::vector<double> times{0.1, 0.5, 1.0, 2.0};
                      for (double tau : {0.5, 1.0, 2.0})
                        for (const auto& p : cooling_curve(tau, 1.0, times, EvolutionMethod::lindblad, {cutoff.value_or(0)}))
                          worst = std::max(worst, std::abs(p.tau_closed - *p.tau_numeric));
                      return worst;
                    }});
  return checks;
}

}  // namespace detail

inline std::vector<Check> suite_checks(std::string_view suite, const SuiteConfig& cfg) {
  if (suite == "fock") return detail::fock_checks(cfg);
  if (suite == "states") return detail::states_checks(cfg);
  if (suite == "channel") return detail::channel_checks(cfg);
  if (suite == "thermo") return detail::thermo_checks(cfg);
  throw DomainError("unknown verify suite '" + std::string(suite) + "'");
}

/// Run `suite` ("all" or one module name). Unknown override names are errors.
inline std::vector<CheckResult> run(std::string_view suite, const SuiteConfig& cfg,
                                    const std::map<std::string, double>& overrides = {}) {
  std::vector<std::string> selected;
  if (suite == "all")
    selected = suite_names();
  else
    selected.emplace_back(suite);

  std::vector<std::pair<std::string, Check>> all;
  std::set<std::string> known;
  for (const auto& s : selected)
    for (auto& c : suite_checks(s, cfg)) {
      known.insert(c.name);
      all.emplace_back(s, std::move(c));
    }
  for (const auto& [name, value] : overrides)
    if (!known.count(name)) throw DomainError("unknown tolerance name '" + name + "'");

  std::vector<CheckResult> results;
  for (auto& [s, c] : all) {
    CheckResult r{s, c.name, std::numeric_limits<double>::infinity(), c.tolerance, false, {}};
    if (auto it = overrides.find(c.name); it != overrides.end()) r.tolerance = it->second;
    try {
      r.observed = c.observe();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.pass = r.error.empty() && r.observed < r.tolerance;
    results.push_back(std::move(r));
  }
  return results;
}

inline std::string format_line(const CheckResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s %.6e %.6e", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.observed, r.tolerance);
  std::string line = buf;
  if (!r.error.empty()) line += " (" + r.error + ")";
  return line;
}

}  // namespace tfd::verify
