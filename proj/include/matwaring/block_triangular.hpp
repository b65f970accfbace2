#pragma once

#include <span>
#include <vector>

#include "matwaring/linalg.hpp"

namespace matwaring::waring {

enum class Orientation { Upper, Lower };

/// Offsets of consecutive diagonal blocks; back() is the total size.
inline std::vector<Index> block_offsets(std::span<const Index> sizes) {
  std::vector<Index> off{0};
  for (Index s : sizes) off.push_back(off.back() + s);
  return off;
}

inline std::vector<Index> block_sizes(std::span<const CMatrix> blocks) {
  std::vector<Index> sizes;
  for (const auto& b : blocks) sizes.push_back(b.rows());
  return sizes;
}

/// Certificate for blkdiag(blocks) ~ blkdiag(blocks) + offDiag, where offDiag is
/// strictly block upper (or lower) triangular and the block spectra are
/// pairwise disjoint. T = I + N with N strictly block triangular; each block
/// N_ij solves  D_i N_ij - N_ij D_j = -(O_ij + sum_k O_ik N_kj)  over the k
/// strictly between i and j.
inline linalg::SimilarityCertificate block_triangular_similarity(std::span<const CMatrix> blocks, const CMatrix& offDiag,
                                                                 Orientation orientation, const Tolerances& tol = {}) {
  const auto sizes = block_sizes(blocks);
  const auto off = block_offsets(sizes);
  const Index n = off.back();
  const auto k = static_cast<Index>(blocks.size());
  if (offDiag.rows() != n || offDiag.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "offDiag does not match the block sizes");
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) {
      const bool allowed = orientation == Orientation::Upper ? j > i : j < i;
      if (!allowed && sizes[i] > 0 && sizes[j] > 0 && offDiag.block(off[i], off[j], sizes[i], sizes[j]).cwiseAbs().maxCoeff() != 0.0)
        throw Error(ErrorKind::InvalidPattern, "offDiag is not strictly block triangular in the requested orientation");
    }

  auto O = [&](Index i, Index j) { return offDiag.block(off[i], off[j], sizes[i], sizes[j]); };
  CMatrix N = CMatrix::Zero(n, n);
  auto Nb = [&](Index i, Index j) { return N.block(off[i], off[j], sizes[i], sizes[j]); };

  auto solve_block = [&](Index i, Index j) {
    CMatrix rhs = O(i, j);
    const Index lo = std::min(i, j) + 1;
    const Index hi = std::max(i, j);
    for (Index m = lo; m < hi; ++m) rhs += O(i, m) * Nb(m, j);
    Nb(i, j) = linalg::sylvester_solve(blocks[static_cast<std::size_t>(i)], blocks[static_cast<std::size_t>(j)], -rhs, tol);
  };

  if (orientation == Orientation::Upper) {
    for (Index i = k - 1; i >= 0; --i)
      for (Index j = i + 1; j < k; ++j) solve_block(i, j);
  } else {
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < i; ++j) solve_block(i, j);
  }

  CMatrix T = CMatrix::Identity(n, n) + N;
  CMatrix Tinv;
  if (orientation == Orientation::Upper)
    Tinv = T.triangularView<Eigen::UnitUpper>().solve(CMatrix::Identity(n, n));
  else
    Tinv = T.triangularView<Eigen::UnitLower>().solve(CMatrix::Identity(n, n));

  const CMatrix d = linalg::block_diag(blocks);
  auto cert = linalg::make_certificate(std::move(T), std::move(Tinv), d, d + offDiag);
  linalg::require_valid(cert, tol.certTol, "block_triangular_similarity");
  return cert;
}

}  // namespace matwaring::waring
