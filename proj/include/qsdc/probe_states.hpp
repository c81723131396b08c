#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsdc/attack.hpp"
#include "qsdc/bitstring.hpp"
#include "qsdc/operators.hpp"
#include "qsdc/symmetry.hpp"

// Eve's probe space. Each probe has the orthonormal basis e_00, e_01, e_10,
// e_11 (local index 2i + j); products are indexed with site 0 most
// significant. Outcome strings enter as bit masks with site l at bit n-1-l.

namespace qsdc {

inline int parity(std::uint32_t x) noexcept { return std::popcount(x) & 1; }

inline std::uint32_t probe_index(std::uint32_t i, std::uint32_t j, int n) noexcept {
  std::uint32_t idx = 0;
  for (int l = n - 1; l >= 0; --l) idx = (idx << 2) | (((i >> l) & 1u) << 1) | ((j >> l) & 1u);
  return idx;
}

/// Single-probe state xi_r^(a)(k), sub-normalized to norm^2 = lambda weight.
inline std::array<double, 4> probe_vector(int a, int r, int k, const SchmidtCoefficients& l) {
  std::array<double, 4> v{};
  if (a == 0) {
    v[static_cast<std::size_t>(2 * r)] = std::sqrt(l(r, 0));
    v[static_cast<std::size_t>(2 * r + 1)] = ((k ^ r) ? -1.0 : 1.0) * std::sqrt(l(r, 1));
  } else {
    v[static_cast<std::size_t>(r)] = std::sqrt(l(0, r));
    v[static_cast<std::size_t>(2 + r)] = (k ? -1.0 : 1.0) * std::sqrt(l(1, r));
  }
  return v;
}

inline std::vector<std::uint32_t> outcome_masks(std::span<const BitString> outcomes) {
  std::vector<std::uint32_t> out;
  out.reserve(outcomes.size());
  for (const BitString& k : outcomes) out.push_back(static_cast<std::uint32_t>(k.value()));
  return out;
}

inline void require_support(std::span<const std::uint32_t> support, int n) {
  if (n < 1 || n > 12) throw std::invalid_argument("probe count must lie in [1, 12]");
  if (support.empty()) throw std::invalid_argument("outcome support is empty");
  for (std::uint32_t k : support)
    if (k >> n) throw std::invalid_argument("outcome mask wider than the ensemble");
}

/// rho_{E|a,s} for a uniform posterior over `support`, block diagonal over r.
template <typename Scalar = std::complex<double>>
HermitianOperator<Scalar> conditional_probe_state(int a, std::span<const std::uint32_t> support,
                                                  int n, const SchmidtCoefficients& l) {
  require_support(support, n);
  const std::uint32_t size = 1u << n;
  const std::size_t dim = std::size_t{1} << (2 * n);
  if (dim > kMaxTotalDim) throw std::length_error("probe space exceeds the dimension cap");
  const double weight = 1.0 / static_cast<double>(support.size());
  std::array<std::array<std::array<double, 4>, 2>, 2> xi{};
  for (int r = 0; r < 2; ++r)
    for (int k = 0; k < 2; ++k)
      xi[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] = probe_vector(a, r, k, l);

  using Block = typename HermitianOperator<Scalar>::Block;
  std::vector<Block> blocks;
  blocks.reserve(size);
  Eigen::VectorXd c(size);
  for (std::uint32_t r = 0; r < size; ++r) {
    Block b;
    b.indices.resize(size);
    for (std::uint32_t u = 0; u < size; ++u)
      b.indices[u] = a == 0 ? probe_index(r, u, n) : probe_index(u, r, n);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(size, size);
    for (std::uint32_t k : support) {
      for (std::uint32_t u = 0; u < size; ++u) {
        double amp = 1.0;
        for (int site = 0; site < n; ++site) {
          const int shift = n - 1 - site;
          const int rl = static_cast<int>((r >> shift) & 1u);
          const int kl = static_cast<int>((k >> shift) & 1u);
          const int ul = static_cast<int>((u >> shift) & 1u);
          const auto& v = xi[static_cast<std::size_t>(rl)][static_cast<std::size_t>(kl)];
          amp *= a == 0 ? v[static_cast<std::size_t>(2 * rl + ul)]
                        : v[static_cast<std::size_t>(2 * ul + rl)];
        }
        c[u] = amp;
      }
      acc.noalias() += weight * c * c.transpose();
    }
    b.matrix = acc.cast<Scalar>();
    blocks.push_back(std::move(b));
  }
  return HermitianOperator<Scalar>::block_diagonal(dim, std::move(blocks));
}

/// S(rho_{E|a,s}) in bits. Each r-block is diagonalized through the Gram
/// matrix of its |K| generating vectors when that is the smaller matrix.
inline double conditional_entropy(int a, std::span<const std::uint32_t> support, int n,
                                  const SchmidtCoefficients& l) {
  require_support(support, n);
  const std::uint32_t size = 1u << n;
  const auto kcount = static_cast<Eigen::Index>(support.size());
  if (kcount >= static_cast<Eigen::Index>(size)) {
    return von_neumann_entropy(conditional_probe_state<double>(a, support, n, l));
  }
  // site[r][k][k'] = <xi_r(k), xi_r(k')>
  std::array<std::array<std::array<double, 2>, 2>, 2> site{};
  for (int r = 0; r < 2; ++r)
    for (int k = 0; k < 2; ++k)
      for (int k2 = 0; k2 < 2; ++k2) {
        const auto u = probe_vector(a, r, k, l);
        const auto v = probe_vector(a, r, k2, l);
        site[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)][static_cast<std::size_t>(k2)] =
            u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3];
      }
  const double weight = 1.0 / static_cast<double>(kcount);
  std::vector<double> spectrum;
  spectrum.reserve(static_cast<std::size_t>(kcount) * size);
  Eigen::MatrixXd gram(kcount, kcount);
  for (std::uint32_t r = 0; r < size; ++r) {
    for (Eigen::Index x = 0; x < kcount; ++x)
      for (Eigen::Index y = x; y < kcount; ++y) {
        const std::uint32_t k = support[static_cast<std::size_t>(x)];
        const std::uint32_t k2 = support[static_cast<std::size_t>(y)];
        double v = weight;
        for (int b = 0; b < n; ++b)
          v *= site[(r >> b) & 1u][(k >> b) & 1u][(k2 >> b) & 1u];
        gram(x, y) = gram(y, x) = v;
      }
    const auto ev = hermitian_eigenvalues(gram);
    spectrum.insert(spectrum.end(), ev.begin(), ev.end());
  }
  return entropy_of_spectrum(spectrum);
}

/// Basis of {y : K xor y = K} over GF(2).
inline std::vector<std::uint32_t> flip_stabilizer_basis(std::span<const std::uint32_t> support, int n) {
  require_support(support, n);
  std::vector<char> member(std::size_t{1} << n, 0);
  for (std::uint32_t k : support) member[k] = 1;
  std::vector<std::uint32_t> basis;   // as found
  std::vector<std::uint32_t> reduced; // echelon copies for independence tests
  for (std::uint32_t y = 1; y < (1u << n); ++y) {
    bool stable = true;
    for (std::uint32_t k : support) {
      if (!member[k ^ y]) {
        stable = false;
        break;
      }
    }
    if (!stable) continue;
    std::uint32_t v = y;
    for (std::uint32_t e : reduced) v = std::min(v, v ^ e);
    if (v != 0) {
      basis.push_back(y);
      reduced.push_back(v);
      std::sort(reduced.begin(), reduced.end(), std::greater<>());
    }
  }
  return basis;
}

/// Precomputed pieces of the closed-form entries of p rho_0 + (1-p) rho_1.
class MixtureEntries {
 public:
  MixtureEntries(std::span<const std::uint32_t> support, int n, const SchmidtCoefficients& l)
      : n_(n), size_(1u << n) {
    require_support(support, n);
    sqrt_lambda_.assign(std::size_t{1} << (2 * n), 1.0);
    for (std::size_t idx = 0; idx < sqrt_lambda_.size(); ++idx) {
      double v = 1.0;
      for (int site = 0; site < n; ++site) v *= std::sqrt(l.values[(idx >> (2 * site)) & 3u]);
      sqrt_lambda_[idx] = v;
    }
    characteristic_.assign(size_, 0.0);
    for (std::uint32_t y = 0; y < size_; ++y) {
      double acc = 0.0;
      for (std::uint32_t k : support) acc += parity(k & y) ? -1.0 : 1.0;
      characteristic_[y] = acc / static_cast<double>(support.size());
    }
  }

  double rho0(std::uint32_t i, std::uint32_t j, std::uint32_t i2, std::uint32_t j2) const {
    if (i != i2) return 0.0;
    const double sign = parity(i & (j ^ j2)) ? -1.0 : 1.0;
    return sign * sqrt_lambda_[probe_index(i, j, n_)] * sqrt_lambda_[probe_index(i, j2, n_)] *
           characteristic_[j ^ j2];
  }

  double rho1(std::uint32_t i, std::uint32_t j, std::uint32_t i2, std::uint32_t j2) const {
    if (j != j2) return 0.0;
    return sqrt_lambda_[probe_index(i, j, n_)] * sqrt_lambda_[probe_index(i2, j, n_)] *
           characteristic_[i ^ i2];
  }

  double mixture(double p, std::uint32_t i, std::uint32_t j, std::uint32_t i2, std::uint32_t j2) const {
    return p * rho0(i, j, i2, j2) + (1.0 - p) * rho1(i, j, i2, j2);
  }

 private:
  int n_;
  std::uint32_t size_;
  std::vector<double> sqrt_lambda_;
  std::vector<double> characteristic_;
};

/// Dense 4^n matrix of p rho_{E|0,s} + (1-p) rho_{E|1,s}.
inline Eigen::MatrixXd mixture_matrix(std::span<const std::uint32_t> support, int n,
                                      const SchmidtCoefficients& l, double p) {
  const std::size_t dim = std::size_t{1} << (2 * n);
  if (dim > kMaxDenseDim) {
    throw std::length_error("dense mixture of dimension " + std::to_string(dim) + " exceeds cap " +
                            std::to_string(kMaxDenseDim));
  }
  MixtureEntries entries(support, n, l);
  const std::uint32_t size = 1u << n;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint32_t i = 0; i < size; ++i)
    for (std::uint32_t j = 0; j < size; ++j)
      for (std::uint32_t i2 = 0; i2 < size; ++i2)
        for (std::uint32_t j2 = 0; j2 < size; ++j2)
          m(probe_index(i, j, n), probe_index(i2, j2, n)) = entries.mixture(p, i, j, i2, j2);
  return m;
}

enum class MixtureStrategy { Dense, FlipBlocks, Gram };

/// Reusable spectral plan for the mixture entropy of one announcement. The
/// plan depends only on the outcome support; values depend on (lambda, p).
///
/// FlipBlocks: the mixture commutes with Z_1^x Z_2^y for x, y in the flip
/// stabilizer of K, so it splits by (syndrome of i, syndrome of j).
/// Gram: the nonzero spectrum equals that of the Gram matrix of the
/// weighted vectors sqrt(P_A(a) P(k|s)) Xi^a_r(k), which is block
/// diagonalized by flip and site-swap symmetries.
class MixturePlan {
 public:
  MixturePlan(std::vector<std::uint32_t> support, int n, MixtureStrategy forced)
      : support_(std::move(support)), n_(n) {
    require_support(support_, n_);
    init(forced, true);
  }

  MixturePlan(std::vector<std::uint32_t> support, int n) : support_(std::move(support)), n_(n) {
    require_support(support_, n_);
    init(MixtureStrategy::Gram, false);
  }

  MixtureStrategy strategy() const noexcept { return strategy_; }
  std::size_t largest_block() const noexcept { return largest_block_; }
  int length() const noexcept { return n_; }
  const std::vector<std::uint32_t>& support() const noexcept { return support_; }

  /// Nonzero spectrum (possibly padded with zeros) of the mixture.
  std::vector<double> spectrum(const SchmidtCoefficients& l, double p) const {
    switch (strategy_) {
      case MixtureStrategy::Dense: return hermitian_eigenvalues(mixture_matrix(support_, n_, l, p));
      case MixtureStrategy::FlipBlocks: return flip_spectrum(l, p);
      case MixtureStrategy::Gram: return gram_spectrum(l, p);
    }
    return {};
  }

  double entropy(const SchmidtCoefficients& l, double p) const {
    const auto ev = spectrum(l, p);
    return entropy_of_spectrum(ev);
  }

 private:
  void init(MixtureStrategy choice, bool forced) {
    const std::size_t dim = std::size_t{1} << (2 * n_);
    const auto ybasis = flip_stabilizer_basis(support_, n_);
    if (!forced || choice == MixtureStrategy::FlipBlocks) build_flip_blocks(ybasis);
    if (!forced || choice == MixtureStrategy::Gram) build_gram(ybasis);
    if (forced) {
      strategy_ = choice;
      if (choice == MixtureStrategy::Dense) {
        if (dim > kMaxDenseDim) throw std::length_error("dense mixture exceeds the dimension cap");
        largest_block_ = dim;
      }
    } else {
      strategy_ = flip_cost_ <= gram_cost_ ? MixtureStrategy::FlipBlocks : MixtureStrategy::Gram;
    }
    if (strategy_ == MixtureStrategy::FlipBlocks) largest_block_ = flip_largest_;
    if (strategy_ == MixtureStrategy::Gram) largest_block_ = gram_largest_;
    if (largest_block_ > kMaxDenseDim) {
      throw std::length_error("mixture block of dimension " + std::to_string(largest_block_) +
                              " exceeds cap " + std::to_string(kMaxDenseDim));
    }
  }

  static std::uint32_t syndrome(std::uint32_t v, std::span<const std::uint32_t> basis) {
    std::uint32_t s = 0;
    for (std::size_t b = 0; b < basis.size(); ++b) s |= static_cast<std::uint32_t>(parity(v & basis[b])) << b;
    return s;
  }

  void build_flip_blocks(const std::vector<std::uint32_t>& ybasis) {
    const std::uint32_t size = 1u << n_;
    const std::uint32_t classes = 1u << ybasis.size();
    flip_blocks_.assign(std::size_t{classes} * classes, {});
    for (std::uint32_t i = 0; i < size; ++i)
      for (std::uint32_t j = 0; j < size; ++j)
        flip_blocks_[syndrome(i, ybasis) * classes + syndrome(j, ybasis)].push_back({i, j});
    flip_cost_ = 0.0;
    flip_largest_ = 0;
    for (const auto& b : flip_blocks_) {
      const double s = static_cast<double>(b.size());
      flip_cost_ += s * s * s + s * s * n_;
      flip_largest_ = std::max(flip_largest_, b.size());
    }
  }

  std::uint32_t gram_index(int a, std::uint32_t kidx, std::uint32_t r) const {
    return ((static_cast<std::uint32_t>(a) * static_cast<std::uint32_t>(support_.size()) + kidx) << n_) | r;
  }

  void build_gram(const std::vector<std::uint32_t>& ybasis) {
    const std::uint32_t size = 1u << n_;
    const auto kcount = static_cast<std::uint32_t>(support_.size());
    const std::size_t dim = std::size_t{2} * kcount * size;
    std::vector<int> kindex(size, -1);
    for (std::uint32_t idx = 0; idx < kcount; ++idx) kindex[support_[idx]] = static_cast<int>(idx);

    std::vector<SignedPermutation> gens;
    auto flip_generator = [&](std::uint32_t x, std::uint32_t y) {
      SignedPermutation g = SignedPermutation::identity(dim);
      for (int a = 0; a < 2; ++a)
        for (std::uint32_t kidx = 0; kidx < kcount; ++kidx)
          for (std::uint32_t r = 0; r < size; ++r) {
            const std::uint32_t k = support_[kidx];
            const std::uint32_t moved = a == 0 ? k ^ y : k ^ x;
            const int phase = parity((a == 0 ? x : y) & r);
            const std::uint32_t from = gram_index(a, kidx, r);
            g.image[from] = gram_index(a, static_cast<std::uint32_t>(kindex[moved]), r);
            g.sign[from] = static_cast<std::int8_t>(phase ? -1 : 1);
          }
      return g;
    };
    for (std::uint32_t x : ybasis) {
      if (gens.size() < kMaxSymmetryGenerators) gens.push_back(flip_generator(x, 0));
      if (gens.size() < kMaxSymmetryGenerators) gens.push_back(flip_generator(0, x));
    }

    auto swap_bits = [&](std::uint32_t v, int l1, int l2) {
      const int s1 = n_ - 1 - l1;
      const int s2 = n_ - 1 - l2;
      const std::uint32_t b1 = (v >> s1) & 1u;
      const std::uint32_t b2 = (v >> s2) & 1u;
      if (b1 == b2) return v;
      return v ^ ((1u << s1) | (1u << s2));
    };
    std::vector<char> used(static_cast<std::size_t>(n_), 0);
    for (int l1 = 0; l1 < n_ && gens.size() < kMaxSymmetryGenerators; ++l1) {
      for (int l2 = l1 + 1; l2 < n_ && !used[static_cast<std::size_t>(l1)]; ++l2) {
        if (used[static_cast<std::size_t>(l2)]) continue;
        bool ok = true;
        for (std::uint32_t k : support_) ok = ok && kindex[swap_bits(k, l1, l2)] >= 0;
        for (std::uint32_t x : ybasis) ok = ok && swap_bits(x, l1, l2) == x;
        if (!ok) continue;
        SignedPermutation g = SignedPermutation::identity(dim);
        for (int a = 0; a < 2; ++a)
          for (std::uint32_t kidx = 0; kidx < kcount; ++kidx)
            for (std::uint32_t r = 0; r < size; ++r) {
              const auto moved = static_cast<std::uint32_t>(kindex[swap_bits(support_[kidx], l1, l2)]);
              g.image[gram_index(a, kidx, r)] = gram_index(a, moved, swap_bits(r, l1, l2));
            }
        gens.push_back(std::move(g));
        used[static_cast<std::size_t>(l1)] = used[static_cast<std::size_t>(l2)] = 1;
      }
    }

    gram_codes_.resize(dim * static_cast<std::size_t>(n_));
    for (int a = 0; a < 2; ++a)
      for (std::uint32_t kidx = 0; kidx < kcount; ++kidx)
        for (std::uint32_t r = 0; r < size; ++r)
          for (int l = 0; l < n_; ++l) {
            const std::uint32_t k = (support_[kidx] >> l) & 1u;
            const std::uint32_t rl = (r >> l) & 1u;
            gram_codes_[std::size_t{gram_index(a, kidx, r)} * static_cast<std::size_t>(n_) +
                        static_cast<std::size_t>(l)] =
                static_cast<std::uint8_t>((static_cast<std::uint32_t>(a) * 2 + k) * 2 + rl);
          }
    gram_blocks_ = isotypic_blocks(dim, gens);
    gram_cost_ = 0.0;
    gram_largest_ = 0;
    for (const auto& b : gram_blocks_) {
      double support_sq = 0.0;
      for (const auto& v : b) support_sq += static_cast<double>(v.index.size());
      support_sq /= static_cast<double>(b.size());
      support_sq *= support_sq;
      const double s = static_cast<double>(b.size());
      gram_cost_ += s * s * s + s * s * support_sq * n_;
      gram_largest_ = std::max(gram_largest_, b.size());
    }
  }

  std::vector<double> flip_spectrum(const SchmidtCoefficients& l, double p) const {
    MixtureEntries entries(support_, n_, l);
    std::vector<double> out;
    out.reserve(std::size_t{1} << (2 * n_));
    for (const auto& block : flip_blocks_) {
      const auto size = static_cast<Eigen::Index>(block.size());
      Eigen::MatrixXd m(size, size);
      for (Eigen::Index r = 0; r < size; ++r)
        for (Eigen::Index c = r; c < size; ++c) {
          const auto& u = block[static_cast<std::size_t>(r)];
          const auto& w = block[static_cast<std::size_t>(c)];
          m(r, c) = m(c, r) = entries.mixture(p, u[0], u[1], w[0], w[1]);
        }
      const auto ev = hermitian_eigenvalues(m);
      out.insert(out.end(), ev.begin(), ev.end());
    }
    return out;
  }

  std::vector<double> gram_spectrum(const SchmidtCoefficients& l, double p) const {
    // Per-site inner products <xi^a_r(k), xi^a'_r'(k')>, index
    // ((a*2+k)*2+r)*8 + ((a'*2+k')*2+r').
    std::array<double, 64> site{};
    for (int a = 0; a < 2; ++a)
      for (int k = 0; k < 2; ++k)
        for (int r = 0; r < 2; ++r)
          for (int a2 = 0; a2 < 2; ++a2)
            for (int k2 = 0; k2 < 2; ++k2)
              for (int r2 = 0; r2 < 2; ++r2) {
                const auto u = probe_vector(a, r, k, l);
                const auto v = probe_vector(a2, r2, k2, l);
                site[static_cast<std::size_t>(((a * 2 + k) * 2 + r) * 8 + (a2 * 2 + k2) * 2 + r2)] =
                    u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3];
              }
    const double kw = 1.0 / static_cast<double>(support_.size());
    const std::array<double, 2> amp{std::sqrt(p * kw), std::sqrt((1.0 - p) * kw)};
    const std::uint32_t dim = gram_dim();
    Eigen::MatrixXd gram(dim, dim);
    for (std::uint32_t alpha = 0; alpha < dim; ++alpha) {
      const std::uint8_t* ca = &gram_codes_[std::size_t{alpha} * static_cast<std::size_t>(n_)];
      const double wa = amp[alpha < dim / 2 ? 0 : 1];
      for (std::uint32_t beta = alpha; beta < dim; ++beta) {
        const std::uint8_t* cb = &gram_codes_[std::size_t{beta} * static_cast<std::size_t>(n_)];
        double v = wa * amp[beta < dim / 2 ? 0 : 1];
        for (int l = 0; l < n_; ++l) v *= site[static_cast<std::size_t>(ca[l] * 8 + cb[l])];
        gram(alpha, beta) = v;
        gram(beta, alpha) = v;
      }
    }
    return block_spectrum(gram_blocks_, [&](std::uint32_t a, std::uint32_t b) { return gram(a, b); });
  }

  std::vector<std::uint32_t> support_;
  int n_;
  MixtureStrategy strategy_ = MixtureStrategy::Gram;
  std::size_t largest_block_ = 0;
  std::vector<std::vector<std::array<std::uint32_t, 2>>> flip_blocks_;
  double flip_cost_ = 0.0;
  std::size_t flip_largest_ = 0;
  std::uint32_t gram_dim() const {
    return (2u * static_cast<std::uint32_t>(support_.size())) << n_;
  }

  std::vector<SymmetryBlock> gram_blocks_;
  std::vector<std::uint8_t> gram_codes_;  // per Gram index and site: (a*2+k)*2+r
  double gram_cost_ = 0.0;
  std::size_t gram_largest_ = 0;
};

}  // namespace qsdc
