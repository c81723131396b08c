#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsdc {

inline constexpr std::size_t kMaxDenseDim = 4096;    // 4^6
inline constexpr std::size_t kMaxTotalDim = 16384;   // 4^7
inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kStateTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = 1e-12;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Eigenvalues of a Hermitian matrix, ascending. No symmetry check.
template <typename Derived>
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Matrix = DenseMatrix<typename Derived::Scalar>;
  if (m.rows() == 0) return {};
  if (m.rows() == 1) return {std::real(m(0, 0))};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

/// -sum mu log2 mu over a spectrum; values below 1e-12 count as zero.
inline double entropy_of_spectrum(std::span<const double> eigenvalues) noexcept {
  double s = 0.0;
  for (double mu : eigenvalues)
    if (mu > kEigenvalueFloor) s -= mu * std::log2(mu);
  return s;
}

/// Finite-dimensional Hermitian operator, stored either densely or as a
/// direct sum of sub-matrices on disjoint sets of basis indices. Indices not
/// covered by any block carry zero rows and columns.
template <typename Scalar = std::complex<double>>
class HermitianOperator {
 public:
  using Matrix = DenseMatrix<Scalar>;

  struct Block {
    std::vector<std::size_t> indices;
    Matrix matrix;
  };

  static HermitianOperator dense(Matrix m, double tol = kHermiticityTolerance) {
    if (m.rows() != m.cols()) throw std::invalid_argument("operator matrix is not square");
    const auto dim = static_cast<std::size_t>(m.rows());
    std::vector<std::size_t> all(dim);
    for (std::size_t i = 0; i < dim; ++i) all[i] = i;
    std::vector<Block> blocks;
    blocks.push_back(Block{std::move(all), std::move(m)});
    HermitianOperator op(dim, std::move(blocks), tol);
    op.structured_ = false;
    return op;
  }

  static HermitianOperator block_diagonal(std::size_t dim, std::vector<Block> blocks,
                                          double tol = kHermiticityTolerance) {
    return HermitianOperator(dim, std::move(blocks), tol);
  }

  std::size_t dim() const noexcept { return dim_; }
  bool is_block_structured() const noexcept { return structured_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  Matrix to_dense() const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (const Block& b : blocks_) {
      for (std::size_t r = 0; r < b.indices.size(); ++r)
        for (std::size_t c = 0; c < b.indices.size(); ++c)
          out(static_cast<Eigen::Index>(b.indices[r]), static_cast<Eigen::Index>(b.indices[c])) =
              b.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return out;
  }

  double trace() const {
    double t = 0.0;
    for (const Block& b : blocks_) t += std::real(b.matrix.trace());
    return t;
  }

 private:
  HermitianOperator(std::size_t dim, std::vector<Block> blocks, double tol)
      : dim_(dim), blocks_(std::move(blocks)) {
    if (dim_ == 0) throw std::invalid_argument("operator dimension must be positive");
    if (dim_ > kMaxTotalDim) {
      throw std::length_error("operator dimension " + std::to_string(dim_) + " exceeds cap " +
                              std::to_string(kMaxTotalDim));
    }
    std::vector<char> used(dim_, 0);
    for (const Block& b : blocks_) {
      const auto size = static_cast<Eigen::Index>(b.indices.size());
      if (b.matrix.rows() != size || b.matrix.cols() != size) {
        throw std::invalid_argument("block matrix size does not match its index set");
      }
      for (std::size_t idx : b.indices) {
        if (idx >= dim_) throw std::invalid_argument("block index out of range");
        if (used[idx]) throw std::invalid_argument("block index sets overlap at " + std::to_string(idx));
        used[idx] = 1;
      }
      if (size > 0 && (b.matrix - b.matrix.adjoint()).cwiseAbs().maxCoeff() > tol) {
        throw std::invalid_argument("operator block is not Hermitian");
      }
    }
  }

  std::size_t dim_;
  std::vector<Block> blocks_;
  bool structured_ = true;
};

/// Sorted eigenvalues; block-structured operators are diagonalized per block
/// and padded with zeros for uncovered indices.
template <typename Scalar>
std::vector<double> eig_hermitian(const HermitianOperator<Scalar>& op) {
  std::vector<double> out;
  out.reserve(op.dim());
  for (const auto& b : op.blocks()) {
    if (b.indices.size() > kMaxDenseDim) {
      throw std::length_error("dense block of dimension " + std::to_string(b.indices.size()) +
                              " exceeds cap " + std::to_string(kMaxDenseDim));
    }
    auto ev = hermitian_eigenvalues(b.matrix);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  out.resize(op.dim(), 0.0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Von Neumann entropy in bits. The operator must be a density operator.
template <typename Scalar>
double von_neumann_entropy(const HermitianOperator<Scalar>& state) {
  const auto ev = eig_hermitian(state);
  double trace = 0.0;
  for (double mu : ev) trace += mu;
  if (std::abs(trace - 1.0) > kStateTolerance) {
    throw std::invalid_argument("state has trace " + std::to_string(trace) + ", expected 1");
  }
  if (!ev.empty() && ev.front() < -kStateTolerance) {
    throw std::invalid_argument("state has negative eigenvalue " + std::to_string(ev.front()));
  }
  return entropy_of_spectrum(ev);
}

template <typename Scalar>
HermitianOperator<Scalar> assemble_block_diagonal(
    std::size_t dim, std::vector<typename HermitianOperator<Scalar>::Block> blocks) {
  return HermitianOperator<Scalar>::block_diagonal(dim, std::move(blocks));
}

}  // namespace qsdc
