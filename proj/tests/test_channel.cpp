#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tfdcool/channel.hpp"
#include "tfdcool/states.hpp"

namespace {

using namespace tfd;

DensityMatrix random_density(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = Complex(g(gen), g(gen));
  const Matrix p = m * m.adjoint();
  return DensityMatrix::hermitized(ModeLayout::single(n), p / p.trace().real());
}

// Oracle: dense sum over the operator list.
Matrix dense_kraus_sum(const DensityMatrix& rho, const ChannelSpec& spec) {
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (const auto& k : kraus_operators(spec, rho.layout())) out += k.matrix() * rho.matrix() * k.matrix().adjoint();
  return out;
}

TEST(Kraus, ZeroTimeLeavesOnlyIdentity) {
  const auto ops = kraus_operators(ChannelSpec{0.0}, ModeLayout::single(6));
  ASSERT_EQ(ops.size(), 6u);
  EXPECT_EQ(ops[0].matrix(), Matrix::Identity(6, 6));
  for (std::size_t n = 1; n < ops.size(); ++n) EXPECT_EQ(max_abs(ops[n].matrix()), 0.0);
}

TEST(Kraus, FirstOperatorIsDampedDiagonal) {
  const double kt = 0.37;
  const auto k0 = kraus_operators(ChannelSpec{kt}, ModeLayout::single(8))[0];
  Matrix expected = Matrix::Zero(8, 8);
  for (int n = 0; n < 8; ++n) expected(n, n) = std::exp(-kt * n);
  EXPECT_LT(max_abs(k0.matrix() - expected), 1e-15);
}

TEST(Kraus, MatchesDefinitionFromLadderPowers) {
  // K_n = sqrt(V^n / n!) e^{-kt a^dagger a} a^n, built by dense products.
  const int n = 7;
  const double kt = 0.45;
  const auto l = ModeLayout::single(n);
  const auto a = annihilation(l, Mode::system).matrix();
  Matrix damp = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) damp(k, k) = std::exp(-kt * k);
  const double v = 1.0 - std::exp(-2.0 * kt);
  const auto ops = kraus_operators(ChannelSpec{kt}, l);
  Matrix power = Matrix::Identity(n, n);
  double factorial = 1.0;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      power = power * a;
      factorial *= k;
    }
    const Matrix expected = std::sqrt(std::pow(v, k) / factorial) * damp * power;
    EXPECT_LT(max_abs(ops[k].matrix() - expected), 1e-13) << k;
  }
}

TEST(Kraus, Completeness) {
  for (int n : {8, 32}) {
    const auto l = ModeLayout::single(n);
    for (double kt : {0.1, 0.5, 2.0}) {
      Matrix sum = Matrix::Zero(n, n);
      for (const auto& k : kraus_operators(ChannelSpec{kt}, l)) sum += k.matrix().adjoint() * k.matrix();
      EXPECT_LT(max_abs(sum - Matrix::Identity(n, n)), 1e-10) << n << ' ' << kt;
    }
  }
}

TEST(Kraus, TwoModeOperatorsActOnTargetOnly) {
  const int n = 4;
  const auto two = ModeLayout::two_mode(n);
  const auto one = ModeLayout::single(n);
  const auto local = kraus_operators(ChannelSpec{0.6}, one);
  const auto sys = kraus_operators(ChannelSpec{0.6, 0, Mode::system}, two);
  const auto til = kraus_operators(ChannelSpec{0.6, 0, Mode::tilde}, two);
  for (int k = 0; k < n; ++k) {
    EXPECT_LT(max_abs(sys[k].matrix() - embed(local[k], Mode::system).matrix()), 1e-15);
    EXPECT_LT(max_abs(til[k].matrix() - embed(local[k], Mode::tilde).matrix()), 1e-15);
  }
  EXPECT_THROW(kraus_operators(ChannelSpec{0.6, 0, Mode::tilde}, one), LayoutError);
  EXPECT_THROW(kraus_operators(ChannelSpec{-0.1}, one), DomainError);
}

TEST(ApplyKraus, AgreesWithDenseOperatorSum) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto rho = random_density(9, seed);
    const ChannelSpec spec{0.1 + 0.3 * seed};
    EXPECT_LT(max_abs(apply_kraus(rho, spec).matrix() - dense_kraus_sum(rho, spec)), 1e-14);
  }
  const auto two = ModeLayout::two_mode(5);
  const auto psi = outer(thermal_vacuum(ThermoParams::from_tau(0.9), two));
  for (auto mode : {Mode::system, Mode::tilde}) {
    const ChannelSpec spec{0.4, 0, mode};
    EXPECT_LT(max_abs(apply_kraus(psi, spec).matrix() - dense_kraus_sum(psi, spec)), 1e-14);
  }
}

TEST(ApplyKraus, VacuumIsFixed) {
  const auto vac = outer(PureState::basis(ModeLayout::single(10), 0));
  for (double kt : {0.0, 0.3, 4.0}) EXPECT_EQ(apply_kraus(vac, ChannelSpec{kt}).matrix(), vac.matrix());
}

TEST(ApplyKraus, OnePhotonDecay) {
  // Oracle: K0|1> = e^{-kt}|1>, K1|1> = sqrt(V)|0>, so rho = p|1><1| + (1-p)|0><0| with p = e^{-2kt}.
  const auto l = ModeLayout::single(5);
  const double kt = 0.35;
  const double p = std::exp(-2.0 * kt);
  Matrix expected = Matrix::Zero(5, 5);
  expected(0, 0) = 1.0 - p;
  expected(1, 1) = p;
  EXPECT_LT(max_abs(apply_kraus(outer(PureState::basis(l, 1)), ChannelSpec{kt}).matrix() - expected), 1e-15);
}

TEST(ApplyKraus, ChaoticMeanPhoton) {
  const auto l = ModeLayout::single(48);
  const auto rho = chaotic_state(ThermoParams::from_tau(1.0), l);
  const auto out = apply_kraus(rho, ChannelSpec{0.5});
  EXPECT_NEAR(expectation(out, number(l, Mode::system)).real(), 0.214097265698, 1e-11);
}

TEST(ApplyKraus, PropertiesOnRandomStates) {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> kt_dist(0.0, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + trial % 10;
    const auto l = ModeLayout::single(n);
    // Keep the top level empty so the trace bound applies.
    Matrix m = random_density(n - 1, 1000 + trial).matrix();
    Matrix padded = Matrix::Zero(n, n);
    padded.topLeftCorner(n - 1, n - 1) = m;
    const DensityMatrix rho(Operator(l, padded));
    const double kt1 = kt_dist(gen), kt2 = kt_dist(gen);
    const auto out = apply_kraus(rho, ChannelSpec{kt1});

    EXPECT_NEAR(out.trace(), rho.trace(), 1e-10);
    const auto report = out.validate(1e-10);
    EXPECT_TRUE(report.ok) << report.min_eigenvalue;
    const auto num = number(l, Mode::system);
    EXPECT_NEAR(expectation(out, num).real(), std::exp(-2.0 * kt1) * expectation(rho, num).real(), 1e-8);
    const auto composed = apply_kraus(out, ChannelSpec{kt2});
    EXPECT_LT(max_abs(composed.matrix() - apply_kraus(rho, ChannelSpec{kt1 + kt2}).matrix()), 1e-9);
  }
}

TEST(ApplyKraus, ChaoticFamilyIsClosed) {
  const auto l = ModeLayout::single(64);
  const auto out = apply_kraus(chaotic_state(ThermoParams::from_tau(1.3), l), ChannelSpec{0.8});
  double q = -1.0;
  for (int n = 0; n + 1 < 64; ++n) {
    if (out(n, n).real() <= 1e-10) break;
    const double ratio = out(n + 1, n + 1).real() / out(n, n).real();
    if (q < 0.0) q = ratio;
    EXPECT_NEAR(ratio, q, 1e-8) << n;
  }
  EXPECT_LT(max_abs(out.matrix() - Matrix(out.matrix().diagonal().asDiagonal())), 1e-16);
}

TEST(ApplyKraus, TwoModeLocality) {
  const auto two = ModeLayout::two_mode(16);
  const auto rho = outer(thermal_vacuum(ThermoParams::from_tau(0.6), two));
  for (double kt : {0.2, 0.9, 3.0}) {
    const auto out = apply_kraus(rho, ChannelSpec{kt});
    EXPECT_LT(max_abs(partial_trace(out, Mode::system).matrix() - partial_trace(rho, Mode::system).matrix()), 1e-9);
  }
}

TEST(LindbladRhs, Examples) {
  const auto l = ModeLayout::single(5);
  const double kappa = 0.7;
  EXPECT_EQ(max_abs(lindblad_rhs(outer(PureState::basis(l, 0)), kappa).matrix()), 0.0);
  Matrix expected = Matrix::Zero(5, 5);
  expected(0, 0) = 2.0 * kappa;
  expected(1, 1) = -2.0 * kappa;
  EXPECT_LT(max_abs(lindblad_rhs(outer(PureState::basis(l, 1)), kappa).matrix() - expected), 1e-15);
}

TEST(LindbladRhs, MatchesDenseFormulaAndIsTraceless) {
  const int n = 7;
  const auto l = ModeLayout::single(n);
  const auto rho = random_density(n, 5);
  const Matrix a = annihilation(l, Mode::system).matrix();
  const Matrix num = a.adjoint() * a;
  const Matrix dense = 1.1 * (2.0 * a * rho.matrix() * a.adjoint() - num * rho.matrix() - rho.matrix() * num);
  const auto rhs = lindblad_rhs(rho, 1.1);
  EXPECT_LT(max_abs(rhs.matrix() - dense), 1e-13);
  EXPECT_LT(std::abs(trace(rhs)), 1e-12);

  const auto two = ModeLayout::two_mode(4);
  const auto psi = outer(thermal_vacuum(ThermoParams::from_tau(1.0), two));
  for (auto mode : {Mode::system, Mode::tilde}) {
    const Matrix b = annihilation(two, mode).matrix();
    const Matrix nb = b.adjoint() * b;
    const Matrix d2 = 2.0 * b * psi.matrix() * b.adjoint() - nb * psi.matrix() - psi.matrix() * nb;
    EXPECT_LT(max_abs(lindblad_rhs(psi, 1.0, mode).matrix() - d2), 1e-13);
  }
}

TEST(LindbladIntegrate, ZeroTimeReturnsInput) {
  const auto rho = random_density(6, 3);
  EXPECT_EQ(lindblad_integrate(rho, 1.0, 0.0).matrix(), rho.matrix());
}

TEST(LindbladIntegrate, MatchesKraus) {
  const auto l = ModeLayout::single(32);
  const auto rho = chaotic_state(ThermoParams::from_tau(1.0), l);
  const auto rk4 = lindblad_integrate(rho, 1.0, 0.5, IntegrationOptions{1e-3});
  EXPECT_LT(trace_distance(rk4, apply_kraus(rho, ChannelSpec{0.5})), 1e-7);
  // Default step, different kappa: same kappa*t gives the same state.
  const auto rk4b = lindblad_integrate(rho, 2.5, 0.2);
  EXPECT_LT(trace_distance(rk4b, apply_kraus(rho, ChannelSpec{0.5})), 1e-7);
}

TEST(LindbladIntegrate, ShortenedFinalStepAndSemigroup) {
  const auto rho = random_density(10, 8);
  const IntegrationOptions opts{1.3e-3};  // 0.5 / 1.3e-3 is not an integer
  const auto direct = lindblad_integrate(rho, 1.0, 0.5, opts);
  EXPECT_LT(trace_distance(direct, apply_kraus(rho, ChannelSpec{0.5})), 1e-6);
  const IntegrationOptions fine{1e-3};
  const auto split = lindblad_integrate(lindblad_integrate(rho, 1.0, 0.2, fine), 1.0, 0.3, fine);
  EXPECT_LT(trace_distance(split, lindblad_integrate(rho, 1.0, 0.5, fine)), 1e-8);
}

TEST(LindbladIntegrate, TraceDriftIsAnError) {
  // A wildly coarse step makes RK4 blow up, which the trace budget catches.
  const auto rho = chaotic_state(ThermoParams::from_tau(3.0), ModeLayout::single(64));
  IntegrationOptions opts{0.5};
  opts.max_trace_drift = 1e-6;
  EXPECT_THROW(lindblad_integrate(rho, 1.0, 5.0, opts), IntegrationError);
  EXPECT_THROW(lindblad_integrate(rho, -1.0, 1.0), DomainError);
}

TEST(Rk4, StepMatchesFourthOrderTaylor) {
  const double h = 0.1;
  const double y = rk4_step(1.0, h, [](double v) { return v; });
  EXPECT_NEAR(y, 1.0 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24, 1e-15);
}

}  // namespace
