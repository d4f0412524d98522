#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sombra/codebook.hpp"
#include "sombra/config.hpp"
#include "sombra/matrix.hpp"

namespace sombra {

/// Per-node sum of squared weights in double. The summation order is fixed
/// for a given build, so every backend sees the same norms.
inline std::vector<double> node_squared_norms(const Codebook& cb) {
  std::vector<double> out(cb.n_nodes());
  for (std::size_t k = 0; k < cb.n_nodes(); ++k) {
    const auto w = cb.node(k);
    out[k] = Eigen::Map<const Eigen::ArrayXf>(w.data(), static_cast<Eigen::Index>(w.size()))
                 .cast<double>()
                 .square()
                 .sum();
  }
  return out;
}

/// Per-article squared norm. Binary rows contribute 1 per stored column, so
/// chi equals the row's column count.
inline std::vector<double> chi_init(const SparseBinaryMatrix& x) {
  std::vector<double> chi(x.n_rows());
  for (std::size_t i = 0; i < x.n_rows(); ++i) chi[i] = static_cast<double>(x.row_nnz(i));
  return chi;
}

inline std::vector<double> chi_init(const SparseValueMatrix& x) {
  std::vector<double> chi(x.n_rows());
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    double s = 0.0;
    for (float v : x.row_values(i)) s += static_cast<double>(v) * static_cast<double>(v);
    chi[i] = s;
  }
  return chi;
}

inline std::vector<double> chi_init(const DenseMatrix& x) {
  std::vector<double> chi(x.n_rows());
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    double s = 0.0;
    for (float v : x.row(i)) s += static_cast<double>(v) * static_cast<double>(v);
    chi[i] = s;
  }
  return chi;
}

/// Squared Euclidean distance between a sparse value row and a dense node,
/// using the precomputed norms: s_k + chi_i - 2 x_i.w_k.
template <class Weight>
double distance_sparse(std::span<const ColumnId> cols, std::span<const float> vals,
                       std::span<const Weight> node, double chi, double node_norm) {
  double dot = 0.0;
  for (std::size_t p = 0; p < cols.size(); ++p) {
    dot += static_cast<double>(vals[p]) * static_cast<double>(node[cols[p]]);
  }
  return node_norm + chi - 2.0 * dot;
}

/// Distance for an index-only row. The dot product is a gather-sum over the
/// stored columns. In normalized_reduced mode `node` must be the normalized
/// row and `node_norm` is ignored.
template <class Weight>
double distance_binary(std::span<const ColumnId> cols, std::span<const Weight> node,
                       double d_a, double node_norm, DistanceMode mode) {
  double dot = 0.0;
  for (auto j : cols) dot += static_cast<double>(node[j]);
  if (mode == DistanceMode::normalized_reduced) return d_a - 2.0 * dot;
  return node_norm + d_a - 2.0 * dot;
}

/// Codebook rows scaled to unit L2 norm, used only for the BMU search in
/// normalized_reduced mode.
struct NormalizedCodebook {
  std::size_t n_nodes = 0;
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<double> norms;
  /// Rows whose norm was zero; they are left as all-zero.
  std::vector<bool> zero_rows;

  std::span<const double> node(std::size_t k) const noexcept {
    return {weights.data() + k * dim, dim};
  }
};

inline NormalizedCodebook normalize_codebook(const Codebook& cb) {
  NormalizedCodebook out;
  out.n_nodes = cb.n_nodes();
  out.dim = cb.dim();
  out.weights.resize(cb.weights().size());
  out.norms.resize(cb.n_nodes());
  out.zero_rows.assign(cb.n_nodes(), false);
  const auto sq = node_squared_norms(cb);
  for (std::size_t k = 0; k < cb.n_nodes(); ++k) {
    const double norm = std::sqrt(sq[k]);
    out.norms[k] = norm;
    auto src = cb.node(k);
    double* dst = out.weights.data() + k * cb.dim();
    if (norm == 0.0) {
      out.zero_rows[k] = true;
      std::fill(dst, dst + cb.dim(), 0.0);
      continue;
    }
    for (std::size_t j = 0; j < cb.dim(); ++j) dst[j] = static_cast<double>(src[j]) / norm;
  }
  return out;
}

}  // namespace sombra
