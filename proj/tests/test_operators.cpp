#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "qsdc/operators.hpp"
#include "qsdc/rng.hpp"

using namespace qsdc;
using cd = std::complex<double>;
using CMat = DenseMatrix<cd>;

namespace {

double gaussian(Rng& rng) {
  // Box-Muller on the library's bit-level uniform helper.
  const double u = random_unit(rng) + 0x1.0p-54;
  const double v = random_unit(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

CMat random_hermitian(Rng& rng, int dim) {
  CMat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = cd(gaussian(rng), gaussian(rng));
  return (m + m.adjoint()) / 2.0;
}

CMat random_unitary(Rng& rng, int dim) {
  Eigen::HouseholderQR<CMat> qr(random_hermitian(rng, dim) + CMat::Identity(dim, dim) * cd(0.0, 1.0));
  return qr.householderQ();
}

CMat random_state(Rng& rng, int dim) {
  CMat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = cd(gaussian(rng), gaussian(rng));
  CMat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

// Characteristic polynomial by Faddeev-LeVerrier in long double, roots by
// sign-change scanning and bisection. Independent of any eigensolver.
std::vector<double> char_poly_roots(const CMat& a) {
  using ld = long double;
  using cld = std::complex<ld>;
  const int n = static_cast<int>(a.rows());
  Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic> al = a.cast<cld>();
  Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  std::vector<ld> c(n + 1, 0.0L);
  c[n] = 1.0L;
  for (int k = 1; k <= n; ++k) {
    m = al * m + c[n - k + 1] * Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
    c[n - k] = -(al * m).trace().real() / static_cast<ld>(k);
  }
  auto poly = [&](ld x) {
    ld v = 0.0L;
    for (int i = n; i >= 0; --i) v = v * x + c[i];
    return v;
  };
  ld bound = 0.0L;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) bound = std::max(bound, static_cast<ld>(std::abs(a(i, j))) * n);
  std::vector<double> roots;
  const int steps = 200000;
  ld prev_x = -bound - 1.0L;
  ld prev_v = poly(prev_x);
  for (int s = 1; s <= steps; ++s) {
    const ld x = -bound - 1.0L + (2.0L * bound + 2.0L) * s / steps;
    const ld v = poly(x);
    if ((prev_v < 0) != (v < 0)) {
      ld lo = prev_x, hi = x;
      for (int it = 0; it < 200; ++it) {
        const ld mid = (lo + hi) / 2;
        if ((poly(lo) < 0) != (poly(mid) < 0)) hi = mid; else lo = mid;
      }
      roots.push_back(static_cast<double>((lo + hi) / 2));
    }
    prev_x = x;
    prev_v = v;
  }
  return roots;
}

}  // namespace

TEST_CASE("eigenvalue examples", "[operators]") {
  const auto half = HermitianOperator<>::dense(CMat::Identity(2, 2) / 2.0);
  const auto ev = eig_hermitian(half);
  CHECK(ev[0] == Approx(0.5).margin(1e-15));
  CHECK(ev[1] == Approx(0.5).margin(1e-15));

  CMat proj = CMat::Zero(4, 4);
  proj(2, 2) = 1.0;
  const auto pv = eig_hermitian(HermitianOperator<>::dense(proj));
  CHECK(pv == std::vector<double>{0.0, 0.0, 0.0, 1.0});
}

TEST_CASE("eigenvalues match characteristic polynomial roots", "[operators]") {
  Rng rng(2718);
  for (int trial = 0; trial < 5; ++trial) {
    const CMat m = random_hermitian(rng, 8);
    const auto ev = eig_hermitian(HermitianOperator<>::dense(m));
    const auto roots = char_poly_roots(m);
    REQUIRE(roots.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(ev[i] == Approx(roots[i]).margin(1e-9));
  }
}

TEST_CASE("non-Hermitian and malformed operators are rejected", "[operators]") {
  CMat m = CMat::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianOperator<>::dense(m), std::invalid_argument);
  CHECK_THROWS_AS(HermitianOperator<>::dense(CMat::Zero(2, 3)), std::invalid_argument);
  using Block = HermitianOperator<>::Block;
  std::vector<Block> overlap{{{0, 1}, CMat::Identity(2, 2)}, {{1}, CMat::Identity(1, 1)}};
  CHECK_THROWS_AS(assemble_block_diagonal<cd>(3, overlap), std::invalid_argument);
  std::vector<Block> outside{{{5}, CMat::Identity(1, 1)}};
  CHECK_THROWS_AS(assemble_block_diagonal<cd>(3, outside), std::invalid_argument);
  std::vector<Block> mismatch{{{0, 1}, CMat::Identity(1, 1)}};
  CHECK_THROWS_AS(assemble_block_diagonal<cd>(3, mismatch), std::invalid_argument);
  CHECK_THROWS_AS(assemble_block_diagonal<cd>(kMaxTotalDim + 1, {}), std::length_error);
}

TEST_CASE("von Neumann entropy examples", "[operators]") {
  CHECK(von_neumann_entropy(HermitianOperator<>::dense(CMat::Identity(2, 2) / 2.0)) == Approx(1.0).margin(1e-12));
  Eigen::VectorXcd psi(3);
  psi << cd(1, 1), cd(0, 2), cd(-1, 0);
  psi.normalize();
  CHECK(von_neumann_entropy(HermitianOperator<>::dense(psi * psi.adjoint())) == Approx(0.0).margin(1e-12));
  CMat mix = CMat::Zero(4, 4);
  mix(0, 0) = 0.5;
  mix(3, 3) = 0.5;
  CHECK(von_neumann_entropy(HermitianOperator<>::dense(mix)) == Approx(1.0).margin(1e-12));
}

TEST_CASE("entropy rejects non-states", "[operators]") {
  CHECK_THROWS_AS(von_neumann_entropy(HermitianOperator<>::dense(CMat::Identity(2, 2))), std::invalid_argument);
  CMat neg = CMat::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(von_neumann_entropy(HermitianOperator<>::dense(neg)), std::invalid_argument);
}

TEST_CASE("block-diagonal assembly", "[operators]") {
  using Block = HermitianOperator<>::Block;
  const auto two = assemble_block_diagonal<cd>(2, {Block{{0}, CMat::Constant(1, 1, 0.5)}, Block{{1}, CMat::Constant(1, 1, 0.5)}});
  CHECK(two.is_block_structured());
  CHECK(von_neumann_entropy(two) == Approx(1.0).margin(1e-12));

  Rng rng(17);
  const CMat rho = random_state(rng, 6);
  std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
  const auto single = assemble_block_diagonal<cd>(6, {Block{all, rho}});
  const auto dense = HermitianOperator<>::dense(rho);
  CHECK(eig_hermitian(single) == eig_hermitian(dense));
  CHECK(von_neumann_entropy(single) == von_neumann_entropy(dense));
}

TEST_CASE("block and dense paths agree", "[operators][property]") {
  Rng rng(23);
  using Block = HermitianOperator<>::Block;
  for (int trial = 0; trial < 20; ++trial) {
    const CMat a = random_state(rng, 3) * 0.4;
    const CMat b = random_state(rng, 4) * 0.6;
    // Interleaved index sets with one uncovered index.
    const std::vector<std::size_t> ia{0, 4, 7};
    const std::vector<std::size_t> ib{1, 2, 5, 6};
    const auto blocks = assemble_block_diagonal<cd>(8, {Block{ia, a}, Block{ib, b}});
    const auto dense = HermitianOperator<>::dense(blocks.to_dense());
    CHECK(von_neumann_entropy(blocks) == Approx(von_neumann_entropy(dense)).margin(1e-9));
    CHECK(blocks.trace() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("eigenvalues sum to the trace", "[operators][property]") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 2 + static_cast<int>(random_below(rng, 63));
    const CMat m = random_hermitian(rng, dim);
    double sum = 0.0;
    for (double v : eig_hermitian(HermitianOperator<>::dense(m))) sum += v;
    CHECK(sum == Approx(m.trace().real()).margin(1e-10));
  }
}

TEST_CASE("entropy is unitarily invariant", "[operators][property]") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + static_cast<int>(random_below(rng, 15));
    const CMat rho = random_state(rng, dim);
    const CMat u = random_unitary(rng, dim);
    const CMat rotated = u * rho * u.adjoint();
    CHECK(von_neumann_entropy(HermitianOperator<>::dense((rotated + rotated.adjoint()) / 2.0)) ==
          Approx(von_neumann_entropy(HermitianOperator<>::dense(rho))).margin(1e-9));
  }
}

TEST_CASE("dense eigensolves respect the dimension cap", "[operators]") {
  using Block = HermitianOperator<double>::Block;
  std::vector<std::size_t> idx(kMaxDenseDim + 1);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto big = HermitianOperator<double>::block_diagonal(
      idx.size(), {Block{idx, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()))}});
  CHECK_THROWS_AS(eig_hermitian(big), std::length_error);
}
