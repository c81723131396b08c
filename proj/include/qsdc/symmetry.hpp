#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qsdc/operators.hpp"

namespace qsdc {

/// Monomial matrix P with P e_a = sign[a] e_{image[a]}.
struct SignedPermutation {
  std::vector<std::uint32_t> image;
  std::vector<std::int8_t> sign;

  static SignedPermutation identity(std::size_t dim) {
    SignedPermutation p;
    p.image.resize(dim);
    p.sign.assign(dim, 1);
    for (std::size_t a = 0; a < dim; ++a) p.image[a] = static_cast<std::uint32_t>(a);
    return p;
  }

  std::size_t size() const noexcept { return image.size(); }

  /// The map "apply *this, then g".
  SignedPermutation then(const SignedPermutation& g) const {
    SignedPermutation out;
    out.image.resize(size());
    out.sign.resize(size());
    for (std::size_t a = 0; a < size(); ++a) {
      out.image[a] = g.image[image[a]];
      out.sign[a] = static_cast<std::int8_t>(sign[a] * g.sign[image[a]]);
    }
    return out;
  }

  friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
};

struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> coeff;
};

/// Orthonormal basis of one isotypic subspace.
using SymmetryBlock = std::vector<SparseVector>;

inline constexpr std::size_t kMaxSymmetryGenerators = 8;

/// Splits R^dim into the joint eigenspaces of an abelian group generated by
/// commuting signed-permutation involutions. Any symmetric matrix commuting
/// with every generator is block diagonal in the returned bases.
inline std::vector<SymmetryBlock> isotypic_blocks(std::size_t dim,
                                                  std::span<const SignedPermutation> generators) {
  const std::size_t m = generators.size();
  if (m > kMaxSymmetryGenerators) throw std::invalid_argument("too many symmetry generators");
  const auto identity = SignedPermutation::identity(dim);
  for (std::size_t g = 0; g < m; ++g) {
    if (generators[g].size() != dim) throw std::invalid_argument("generator dimension mismatch");
    if (generators[g].then(generators[g]) != identity) {
      throw std::invalid_argument("symmetry generator is not an involution");
    }
    for (std::size_t h = 0; h < g; ++h) {
      if (generators[g].then(generators[h]) != generators[h].then(generators[g])) {
        throw std::invalid_argument("symmetry generators do not commute");
      }
    }
  }

  const std::size_t order = std::size_t{1} << m;
  std::vector<SignedPermutation> elements;
  elements.reserve(order);
  elements.push_back(identity);
  for (std::size_t mask = 1; mask < order; ++mask) {
    const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
    elements.push_back(elements[mask & (mask - 1)].then(generators[low]));
  }

  std::vector<SymmetryBlock> blocks(order);
  std::vector<char> visited(dim, 0);
  std::vector<std::uint32_t> orbit;
  std::vector<double> coeff;
  for (std::size_t a = 0; a < dim; ++a) {
    if (visited[a]) continue;
    orbit.clear();
    for (const auto& g : elements) {
      const std::uint32_t b = g.image[a];
      if (!visited[b]) {
        visited[b] = 1;
        orbit.push_back(b);
      }
    }
    for (std::size_t chi = 0; chi < order; ++chi) {
      coeff.assign(orbit.size(), 0.0);
      for (std::size_t gi = 0; gi < order; ++gi) {
        const double character = (std::popcount(chi & gi) & 1) ? -1.0 : 1.0;
        const std::uint32_t b = elements[gi].image[a];
        std::size_t slot = 0;
        while (orbit[slot] != b) ++slot;
        coeff[slot] += character * elements[gi].sign[a];
      }
      double norm2 = 0.0;
      for (double c : coeff) norm2 += c * c;
      if (norm2 < 0.5) continue;  // coefficients are integers
      const double scale = 1.0 / std::sqrt(norm2);
      SparseVector v;
      for (std::size_t slot = 0; slot < orbit.size(); ++slot) {
        if (coeff[slot] != 0.0) {
          v.index.push_back(orbit[slot]);
          v.coeff.push_back(coeff[slot] * scale);
        }
      }
      blocks[chi].push_back(std::move(v));
    }
  }
  std::erase_if(blocks, [](const SymmetryBlock& b) { return b.empty(); });
  return blocks;
}

/// Eigenvalues of the symmetric matrix with entries entry(a, b), computed
/// block by block in a symmetry-adapted basis. Unsorted.
template <class EntryFn>
std::vector<double> block_spectrum(std::span<const SymmetryBlock> blocks, EntryFn&& entry) {
  std::vector<double> out;
  for (const SymmetryBlock& block : blocks) {
    const auto size = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXd reduced(size, size);
    for (Eigen::Index r = 0; r < size; ++r) {
      const SparseVector& u = block[static_cast<std::size_t>(r)];
      for (Eigen::Index c = r; c < size; ++c) {
        const SparseVector& w = block[static_cast<std::size_t>(c)];
        double acc = 0.0;
        for (std::size_t x = 0; x < u.index.size(); ++x)
          for (std::size_t y = 0; y < w.index.size(); ++y)
            acc += u.coeff[x] * w.coeff[y] * entry(u.index[x], w.index[y]);
        reduced(r, c) = acc;
        reduced(c, r) = acc;
      }
    }
    auto ev = hermitian_eigenvalues(reduced);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

}  // namespace qsdc
