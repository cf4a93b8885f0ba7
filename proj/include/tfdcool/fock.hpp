#pragma once

// Truncated Fock-space operator algebra for one mode or a system/tilde pair.
//
// Basis convention: a single mode holds levels 0..N-1. A two-mode layout
// holds N*N levels ordered system-major, index = n_system * N + n_tilde.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "tfdcool/errors.hpp"

namespace tfd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class Mode { system, tilde };

inline const char* to_string(Mode mode) { return mode == Mode::system ? "system" : "tilde"; }

class ModeLayout {
 public:
  static ModeLayout single(int cutoff) { return ModeLayout(cutoff, 1); }
  static ModeLayout two_mode(int cutoff) { return ModeLayout(cutoff, 2); }

  int cutoff() const { return cutoff_; }
  int modes() const { return modes_; }
  bool is_two_mode() const { return modes_ == 2; }
  Index dim() const { return is_two_mode() ? Index{cutoff_} * cutoff_ : Index{cutoff_}; }

  ModeLayout single_mode() const { return single(cutoff_); }

  /// Occupation of `mode` in composite basis state `index`.
  int level(Index index, Mode mode) const {
    require(mode);
    if (!is_two_mode()) return static_cast<int>(index);
    return static_cast<int>(mode == Mode::system ? index / cutoff_ : index % cutoff_);
  }

  /// Index distance between |.., n, ..> and |.., n+1, ..> on `mode`.
  Index stride(Mode mode) const {
    require(mode);
    return (is_two_mode() && mode == Mode::system) ? Index{cutoff_} : Index{1};
  }

  Index index(int system_level, int tilde_level) const {
    if (!is_two_mode()) throw LayoutError("index(system, tilde) needs a two-mode layout");
    return Index{system_level} * cutoff_ + tilde_level;
  }

  void require(Mode mode) const {
    if (mode == Mode::tilde && !is_two_mode())
      throw LayoutError("tilde mode requested on a single-mode layout");
  }

  bool operator==(const ModeLayout&) const = default;

 private:
  ModeLayout(int cutoff, int modes) : cutoff_(cutoff), modes_(modes) {
    if (cutoff < 2) throw LayoutError("Fock cutoff must be >= 2, got " + std::to_string(cutoff));
  }

  int cutoff_;
  int modes_;
};

/// Dense complex matrix over the basis described by its layout.
class Operator {
 public:
  Operator(ModeLayout layout, Matrix entries) : layout_(layout), entries_(std::move(entries)) {
    if (entries_.rows() != layout_.dim() || entries_.cols() != layout_.dim())
      throw LayoutError("operator dimension " + std::to_string(entries_.rows()) + "x" +
                        std::to_string(entries_.cols()) + " does not match layout dimension " +
                        std::to_string(layout_.dim()));
    if (!entries_.allFinite()) throw DomainError("operator has non-finite entries");
  }

  static Operator identity(ModeLayout layout) {
    return Operator(layout, Matrix::Identity(layout.dim(), layout.dim()));
  }
  static Operator zero(ModeLayout layout) {
    return Operator(layout, Matrix::Zero(layout.dim(), layout.dim()));
  }

  const ModeLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }
  Complex operator()(Index row, Index col) const { return entries_(row, col); }

 private:
  ModeLayout layout_;
  Matrix entries_;
};

inline void require_same_layout(const ModeLayout& a, const ModeLayout& b, const char* what) {
  if (!(a == b)) throw LayoutError(std::string(what) + ": layout mismatch");
}

inline Operator dagger(const Operator& a) { return Operator(a.layout(), a.matrix().adjoint()); }

inline Operator multiply(const Operator& a, const Operator& b) {
  require_same_layout(a.layout(), b.layout(), "multiply");
  return Operator(a.layout(), a.matrix() * b.matrix());
}

inline Operator add(const Operator& a, const Operator& b) {
  require_same_layout(a.layout(), b.layout(), "add");
  return Operator(a.layout(), a.matrix() + b.matrix());
}

inline Operator subtract(const Operator& a, const Operator& b) {
  require_same_layout(a.layout(), b.layout(), "subtract");
  return Operator(a.layout(), a.matrix() - b.matrix());
}

inline Operator scale(const Operator& a, Complex factor) {
  return Operator(a.layout(), factor * a.matrix());
}

inline Operator operator*(const Operator& a, const Operator& b) { return multiply(a, b); }
inline Operator operator+(const Operator& a, const Operator& b) { return add(a, b); }
inline Operator operator-(const Operator& a, const Operator& b) { return subtract(a, b); }
inline Operator operator*(Complex factor, const Operator& a) { return scale(a, factor); }

inline Complex trace(const Operator& a) { return a.matrix().trace(); }

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Ladder operator a (or ã) with a|n> = sqrt(n)|n-1>; identity on the other mode.
inline Operator annihilation(const ModeLayout& layout, Mode mode) {
  layout.require(mode);
  const Index dim = layout.dim();
  const Index step = layout.stride(mode);
  Matrix m = Matrix::Zero(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    const int n = layout.level(col, mode);
    if (n > 0) m(col - step, col) = std::sqrt(static_cast<double>(n));
  }
  return Operator(layout, std::move(m));
}

inline Operator creation(const ModeLayout& layout, Mode mode) {
  return dagger(annihilation(layout, mode));
}

inline Operator number(const ModeLayout& layout, Mode mode) {
  layout.require(mode);
  Matrix m = Matrix::Zero(layout.dim(), layout.dim());
  for (Index i = 0; i < layout.dim(); ++i) m(i, i) = static_cast<double>(layout.level(i, mode));
  return Operator(layout, std::move(m));
}

/// Kronecker product of two single-mode operators in system-major order.
inline Operator tensor(const Operator& system, const Operator& tilde) {
  if (system.layout().is_two_mode() || tilde.layout().is_two_mode())
    throw LayoutError("tensor expects two single-mode operators");
  if (system.layout().cutoff() != tilde.layout().cutoff())
    throw LayoutError("tensor: cutoff mismatch (" + std::to_string(system.layout().cutoff()) +
                      " vs " + std::to_string(tilde.layout().cutoff()) + ")");
  const auto layout = ModeLayout::two_mode(system.layout().cutoff());
  const Index n = system.dim();
  Matrix m(layout.dim(), layout.dim());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m.block(i * n, j * n, n, n) = system(i, j) * tilde.matrix();
  return Operator(layout, std::move(m));
}

/// Lift a single-mode operator onto one mode of a two-mode layout.
inline Operator embed(const Operator& local, Mode mode) {
  const auto id = Operator::identity(local.layout());
  return mode == Mode::system ? tensor(local, id) : tensor(id, local);
}

/// Vector in a truncated Fock basis. Not renormalized after truncation.
class PureState {
 public:
  PureState(ModeLayout layout, Vector amplitudes) : layout_(layout), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != layout_.dim())
      throw LayoutError("state length does not match layout dimension");
    if (!amplitudes_.allFinite()) throw DomainError("state has non-finite amplitudes");
  }

  static PureState basis(ModeLayout layout, Index index) {
    Vector v = Vector::Zero(layout.dim());
    v(index) = 1.0;
    return PureState(layout, std::move(v));
  }

  const ModeLayout& layout() const { return layout_; }
  const Vector& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

 private:
  ModeLayout layout_;
  Vector amplitudes_;
};

namespace detail {

/// Index sets that the nonzero pattern of `m` couples together, ordered by
/// their smallest member. Permuting to this order makes `m` block diagonal.
inline std::vector<std::vector<Index>> coupled_blocks(const Matrix& m) {
  const Index n = m.rows();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (m(i, j) != Complex{0.0, 0.0}) {
        const Index ri = find(i);
        const Index rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
  std::vector<std::vector<Index>> blocks;
  std::vector<Index> block_of(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    const Index root = find(i);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[block_of[root]].push_back(i);
  }
  return blocks;
}

inline Matrix gather(const Matrix& m, const std::vector<Index>& idx) {
  const auto k = static_cast<Index>(idx.size());
  Matrix sub(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) sub(i, j) = m(idx[i], idx[j]);
  return sub;
}

/// Eigenvalues of a Hermitian matrix, block by block.
inline std::vector<double> hermitian_eigenvalues(const Matrix& h) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(h.rows()));
  for (const auto& block : coupled_blocks(h)) {
    if (block.size() == 1) {
      values.push_back(h(block[0], block[0]).real());
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gather(h, block), Eigen::EigenvaluesOnly);
    for (Index k = 0; k < solver.eigenvalues().size(); ++k) values.push_back(solver.eigenvalues()(k));
  }
  return values;
}

}  // namespace detail

/// exp(A), computed per coupled block with Padé scaling-and-squaring.
inline Operator matrix_exponential(const Operator& a) {
  const Matrix& m = a.matrix();
  Matrix result = Matrix::Zero(m.rows(), m.cols());
  for (const auto& block : detail::coupled_blocks(m)) {
    if (block.size() == 1) {
      result(block[0], block[0]) = std::exp(m(block[0], block[0]));
      continue;
    }
    const Matrix sub = detail::gather(m, block);
    const Matrix expsub = sub.exp();
    for (std::size_t j = 0; j < block.size(); ++j)
      for (std::size_t i = 0; i < block.size(); ++i)
        result(block[i], block[j]) = expsub(static_cast<Index>(i), static_cast<Index>(j));
  }
  return Operator(a.layout(), std::move(result));
}

/// Floors used by DensityMatrix::validate.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;

struct DensityReport {
  double hermiticity_error;
  double trace_error;
  double min_eigenvalue;
  bool ok;
};

/// Hermitian operator used as a quantum state. Hermiticity is enforced on
/// construction; trace and positivity are checked by validate().
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op) : op_(std::move(op)) {
    const double err = max_abs(op_.matrix() - op_.matrix().adjoint());
    if (err >= kHermitianTol)
      throw DomainError("density matrix is not Hermitian (max |rho - rho^dagger| = " +
                        std::to_string(err) + ")");
  }

  /// Symmetrize (rho + rho^dagger)/2 before wrapping.
  static DensityMatrix hermitized(ModeLayout layout, const Matrix& m) {
    return DensityMatrix(Operator(layout, 0.5 * (m + m.adjoint())));
  }

  const Operator& op() const { return op_; }
  const ModeLayout& layout() const { return op_.layout(); }
  const Matrix& matrix() const { return op_.matrix(); }
  Index dim() const { return op_.dim(); }
  Complex operator()(Index row, Index col) const { return op_(row, col); }

  double trace() const { return op_.matrix().trace().real(); }

  DensityReport validate(double trace_eps) const {
    const auto eig = detail::hermitian_eigenvalues(op_.matrix());
    const double min_eig = eig.empty() ? 0.0 : *std::min_element(eig.begin(), eig.end());
    const double herm = max_abs(op_.matrix() - op_.matrix().adjoint());
    const double tr = std::abs(trace() - 1.0);
    return {herm, tr, min_eig, herm < kHermitianTol && tr < trace_eps && min_eig > kEigenvalueFloor};
  }

 private:
  Operator op_;
};

inline DensityMatrix outer(const PureState& psi) {
  const Vector& v = psi.amplitudes();
  return DensityMatrix::hermitized(psi.layout(), v * v.adjoint());
}

inline DensityMatrix product_state(const DensityMatrix& system, const DensityMatrix& tilde) {
  return DensityMatrix::hermitized(ModeLayout::two_mode(system.layout().cutoff()),
                                   tensor(system.op(), tilde.op()).matrix());
}

/// Reduced state after tracing out `over`.
inline DensityMatrix partial_trace(const DensityMatrix& rho, Mode over) {
  const auto& layout = rho.layout();
  if (!layout.is_two_mode()) throw LayoutError("partial_trace needs a two-mode state");
  const int n = layout.cutoff();
  Matrix sigma = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Complex sum = 0.0;
      for (int k = 0; k < n; ++k)
        sum += over == Mode::tilde ? rho(layout.index(i, k), layout.index(j, k))
                                   : rho(layout.index(k, i), layout.index(k, j));
      sigma(i, j) = sum;
    }
  return DensityMatrix::hermitized(layout.single_mode(), sigma);
}

/// Reduced state of |psi><psi| without forming the N^2 x N^2 projector.
inline DensityMatrix partial_trace(const PureState& psi, Mode over) {
  const auto& layout = psi.layout();
  if (!layout.is_two_mode()) throw LayoutError("partial_trace needs a two-mode state");
  const int n = layout.cutoff();
  // coeff(ns, nt) = <ns, nt|psi>
  Matrix coeff(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) coeff(s, t) = psi.amplitudes()(layout.index(s, t));
  const Matrix sigma =
      over == Mode::tilde ? Matrix(coeff * coeff.adjoint()) : Matrix(coeff.transpose() * coeff.conjugate());
  return DensityMatrix::hermitized(layout.single_mode(), sigma);
}

inline Complex expectation(const DensityMatrix& rho, const Operator& a) {
  require_same_layout(rho.layout(), a.layout(), "expectation");
  // Tr(rho A) = sum_ij rho_ij A_ji
  return (rho.matrix().transpose().cwiseProduct(a.matrix())).sum();
}

inline Complex expectation(const PureState& psi, const Operator& a) {
  require_same_layout(psi.layout(), a.layout(), "expectation");
  return psi.amplitudes().dot(a.matrix() * psi.amplitudes());
}

inline double purity(const DensityMatrix& rho) { return rho.matrix().squaredNorm(); }

/// Half the trace norm of rho - sigma.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_layout(rho.layout(), sigma.layout(), "trace_distance");
  const Matrix diff = rho.matrix() - sigma.matrix();
  double sum = 0.0;
  for (double ev : detail::hermitian_eigenvalues(0.5 * (diff + diff.adjoint()))) sum += std::abs(ev);
  return 0.5 * sum;
}

inline constexpr double kTailBound = 1e-14;

/// Smallest cutoff N whose geometric tail ratio^N drops below 1e-14,
/// clamped to [lo, hi]. `ratio` is the population ratio tanh^2(theta).
inline int select_cutoff(double ratio, int lo = 8, int hi = 128) {
  if (ratio < 0.0 || ratio >= 1.0) throw DomainError("tail ratio must lie in [0, 1)");
  int n = 1;
  double tail = ratio;
  while (tail >= kTailBound && n < hi) {
    tail *= ratio;
    ++n;
  }
  return std::clamp(n, lo, hi);
}

}  // namespace tfd
