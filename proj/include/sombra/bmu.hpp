#pragma once

// Best/second-best matching unit search for the three input representations.
//
// Sparse inputs are scored against the codebook laid out as column-major
// panels of kPanelWidth nodes, so each stored column of an article touches
// one contiguous run of floats per panel. Dense inputs go through a blocked
// double-precision GEMM. Every kernel scores node k for article i as
//   bias_k + chi_i - 2 * (x_i . w_k)
// where bias_k is the node's squared norm (euclidean_full) or 0
// (normalized_reduced, against unit-norm rows).

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "sombra/codebook.hpp"
#include "sombra/config.hpp"
#include "sombra/distance.hpp"
#include "sombra/matrix.hpp"
#include "sombra/parallel.hpp"

namespace sombra {

/// Per-article BMU assignment. dst1 is the squared Euclidean distance to bmu1
/// (clamped at zero against rounding) regardless of the search mode.
struct BmuPair {
  std::vector<NodeIndex> bmu1;
  std::vector<NodeIndex> bmu2;
  std::vector<double> dst1;

  std::size_t size() const noexcept { return bmu1.size(); }
};

template <class Input>
constexpr Backend backend_of() {
  if constexpr (std::is_same_v<Input, DenseMatrix>) return Backend::dense;
  else if constexpr (std::is_same_v<Input, SparseValueMatrix>) return Backend::sparse;
  else {
    static_assert(std::is_same_v<Input, SparseBinaryMatrix>, "unsupported input type");
    return Backend::binary;
  }
}

inline constexpr std::size_t kPanelWidth = 16;

/// Codebook state derived once per epoch for the BMU search.
struct PreparedCodebook {
  using RowMajorXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Backend backend = Backend::binary;
  DistanceMode mode = DistanceMode::euclidean_full;
  std::size_t n_nodes = 0;
  std::size_t dim = 0;
  /// Squared norms of the raw (unnormalized) rows.
  std::vector<double> raw_norms;
  /// Per-node additive term of the search score, padded to whole panels with +inf.
  std::vector<double> bias;
  /// Sparse backends: n_panels blocks of dim x kPanelWidth floats.
  std::vector<float> panels;
  std::size_t n_panels = 0;
  /// Dense backend: search rows in double precision.
  RowMajorXd dense;

  const float* panel(std::size_t t) const noexcept {
    return panels.data() + t * dim * kPanelWidth;
  }
};

namespace detail {

template <class RowAt>
void fill_panels(PreparedCodebook& pc, RowAt row_at) {
  pc.n_panels = (pc.n_nodes + kPanelWidth - 1) / kPanelWidth;
  // Every used lane is overwritten below; only the tail panel needs clearing.
  pc.panels.resize(pc.n_panels * pc.dim * kPanelWidth);
  if (pc.n_nodes % kPanelWidth != 0) {
    std::fill(pc.panels.end() - static_cast<std::ptrdiff_t>(pc.dim * kPanelWidth),
              pc.panels.end(), 0.0f);
  }
  constexpr std::size_t kColBlock = 64;
  for (std::size_t t = 0; t < pc.n_panels; ++t) {
    const std::size_t k0 = t * kPanelWidth;
    const std::size_t kn = std::min(kPanelWidth, pc.n_nodes - k0);
    float* dst = pc.panels.data() + t * pc.dim * kPanelWidth;
    for (std::size_t j0 = 0; j0 < pc.dim; j0 += kColBlock) {
      const std::size_t jn = std::min(kColBlock, pc.dim - j0);
      for (std::size_t q = 0; q < kn; ++q) {
        const auto src = row_at(k0 + q);
        for (std::size_t j = 0; j < jn; ++j) {
          dst[(j0 + j) * kPanelWidth + q] = static_cast<float>(src[j0 + j]);
        }
      }
    }
  }
}

}  // namespace detail

/// Prepares `cb` into `pc`, reusing its buffers. Repeated calls at the same
/// shape allocate nothing.
inline void prepare_codebook(const Codebook& cb, Backend backend, DistanceMode mode,
                             PreparedCodebook& pc) {
  pc.backend = backend;
  pc.mode = mode;
  pc.n_nodes = cb.n_nodes();
  pc.dim = cb.dim();
  pc.raw_norms = node_squared_norms(cb);

  const std::size_t padded = (pc.n_nodes + kPanelWidth - 1) / kPanelWidth * kPanelWidth;
  pc.bias.assign(padded, std::numeric_limits<double>::infinity());

  if (mode == DistanceMode::euclidean_full) {
    std::copy(pc.raw_norms.begin(), pc.raw_norms.end(), pc.bias.begin());
    if (backend == Backend::dense) {
      pc.dense = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                     cb.weights().data(), static_cast<Eigen::Index>(pc.n_nodes),
                     static_cast<Eigen::Index>(pc.dim))
                     .cast<double>();
    } else {
      detail::fill_panels(pc, [&](std::size_t k) { return cb.node(k); });
    }
  } else {
    std::fill(pc.bias.begin(), pc.bias.begin() + static_cast<std::ptrdiff_t>(pc.n_nodes), 0.0);
    const auto normalized = normalize_codebook(cb);
    if (backend == Backend::dense) {
      pc.dense = Eigen::Map<const PreparedCodebook::RowMajorXd>(
          normalized.weights.data(), static_cast<Eigen::Index>(pc.n_nodes),
          static_cast<Eigen::Index>(pc.dim));
    } else {
      detail::fill_panels(pc, [&](std::size_t k) { return normalized.node(k); });
    }
  }
  if (backend == Backend::dense) {
    pc.panels.clear();
    pc.n_panels = 0;
  } else {
    pc.dense.resize(0, 0);
  }
}

inline PreparedCodebook prepare_codebook(const Codebook& cb, Backend backend, DistanceMode mode) {
  PreparedCodebook pc;
  prepare_codebook(cb, backend, mode, pc);
  return pc;
}

namespace detail {

struct TopTwo {
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
  NodeIndex b1 = std::numeric_limits<NodeIndex>::max();
  NodeIndex b2 = std::numeric_limits<NodeIndex>::max();

  /// Scans candidates in ascending node order; strict comparisons keep the
  /// smallest index on ties.
  void offer(double d, NodeIndex k) noexcept {
    if (d < d2) {
      if (d < d1) {
        d2 = d1;
        b2 = b1;
        d1 = d;
        b1 = k;
      } else {
        d2 = d;
        b2 = k;
      }
    }
  }
};

template <bool Binary, class Input>
void search_sparse(const Input& x, const PreparedCodebook& pc, std::span<const double> chi,
                   std::size_t begin, std::size_t end, std::span<TopTwo> top) {
  constexpr std::size_t W = kPanelWidth;
  // Fixed-size lanes so the compiler emits packed converts and adds. Each lane
  // still sums its column gathers in row order, as the scalar distances do.
  using Lanes = Eigen::Array<double, W, 1>;
  using PanelRow = Eigen::Array<float, W, 1>;
  const auto offsets = x.offsets();
  const auto indices = x.indices();
  for (std::size_t t = 0; t < pc.n_panels; ++t) {
    const float* panel = pc.panel(t);
    const Eigen::Map<const Lanes> bias(pc.bias.data() + t * W);
    const auto k0 = static_cast<NodeIndex>(t * W);
    for (std::size_t i = begin; i < end; ++i) {
      Lanes acc = Lanes::Zero();
      for (RowOffset p = offsets[i]; p < offsets[i + 1]; ++p) {
        const Eigen::Map<const PanelRow> r(panel + static_cast<std::size_t>(indices[p]) * W);
        if constexpr (Binary) {
          acc += r.template cast<double>();
        } else {
          acc += static_cast<double>(x.values()[p]) * r.template cast<double>();
        }
      }
      const Lanes d = (bias + chi[i]) - 2.0 * acc;

      // Skip the ordered scan when no candidate in this panel beats d2.
      TopTwo& s = top[i - begin];
      if (d.minCoeff() < s.d2) {
        for (std::size_t q = 0; q < W; ++q) {
          s.offer(d[static_cast<Eigen::Index>(q)], k0 + static_cast<NodeIndex>(q));
        }
      }
    }
  }
}

inline void search_dense(const DenseMatrix& x, const PreparedCodebook& pc,
                         std::span<const double> chi, std::size_t begin, std::size_t end,
                         std::span<TopTwo> top) {
  using RowMajorXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  constexpr std::size_t kBlock = 128;
  const auto n_cols = static_cast<Eigen::Index>(x.n_cols());
  Eigen::MatrixXd block;
  Eigen::MatrixXd dots;
  for (std::size_t i0 = begin; i0 < end; i0 += kBlock) {
    const std::size_t rows = std::min(kBlock, end - i0);
    Eigen::Map<const RowMajorXf> xf(x.data().data() + i0 * x.n_cols(),
                                    static_cast<Eigen::Index>(rows), n_cols);
    block = xf.cast<double>();
    dots.noalias() = block * pc.dense.transpose();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = i0 + r;
      TopTwo& s = top[i - begin];
      const double c = chi[i];
      for (std::size_t k = 0; k < pc.n_nodes; ++k) {
        s.offer(pc.bias[k] + c - 2.0 * dots(static_cast<Eigen::Index>(r),
                                             static_cast<Eigen::Index>(k)),
                static_cast<NodeIndex>(k));
      }
    }
  }
}

/// Exact squared Euclidean distance from article i to raw node k.
template <class Input>
double exact_distance(const Input& x, const Codebook& cb, std::span<const double> raw_norms,
                      std::span<const double> chi, std::size_t i, std::size_t k) {
  if constexpr (std::is_same_v<Input, SparseBinaryMatrix>) {
    return distance_binary(x.row(i), cb.node(k), chi[i], raw_norms[k], DistanceMode::euclidean_full);
  } else if constexpr (std::is_same_v<Input, SparseValueMatrix>) {
    return distance_sparse(x.row(i), x.row_values(i), cb.node(k), chi[i], raw_norms[k]);
  } else {
    double dot = 0.0;
    auto row = x.row(i);
    auto node = cb.node(k);
    for (std::size_t j = 0; j < row.size(); ++j) {
      dot += static_cast<double>(row[j]) * static_cast<double>(node[j]);
    }
    return raw_norms[k] + chi[i] - 2.0 * dot;
  }
}

}  // namespace detail

/// BMU pass against an already prepared codebook. `cb` must be the codebook
/// `pc` was prepared from; it is used to report Euclidean dst1 in
/// normalized_reduced mode.
template <class Input>
void search_bmus(const Input& x, const Codebook& cb, const PreparedCodebook& pc,
                 std::span<const double> chi, unsigned workers, BmuPair& out) {
  if (pc.backend != backend_of<Input>()) {
    throw ArgumentError(std::string("codebook prepared for backend '") +
                        std::string(to_string(pc.backend)) + "' but input is '" +
                        std::string(to_string(backend_of<Input>())) + "'");
  }
  if (x.n_cols() != pc.dim) {
    throw ArgumentError("input has " + std::to_string(x.n_cols()) + " columns, codebook has " +
                        std::to_string(pc.dim));
  }
  if (pc.n_nodes < 2) throw ArgumentError("BMU pair search needs at least 2 nodes");
  const std::size_t n = x.n_rows();
  out.bmu1.resize(n);
  out.bmu2.resize(n);
  out.dst1.resize(n);

  parallel_for(workers, n, [&](std::size_t begin, std::size_t end, unsigned) {
    std::vector<detail::TopTwo> top(end - begin);
    if constexpr (std::is_same_v<Input, DenseMatrix>) {
      detail::search_dense(x, pc, chi, begin, end, top);
    } else {
      detail::search_sparse<std::is_same_v<Input, SparseBinaryMatrix>>(x, pc, chi, begin, end, top);
    }
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = top[i - begin];
      out.bmu1[i] = s.b1;
      out.bmu2[i] = s.b2;
      const double d = pc.mode == DistanceMode::euclidean_full
                           ? s.d1
                           : detail::exact_distance(x, cb, pc.raw_norms, chi, i, s.b1);
      out.dst1[i] = std::max(d, 0.0);
    }
  });
}

/// One-shot BMU pair search: per article the nearest node and the nearest
/// node other than it, ties to the smallest index.
template <class Input>
BmuPair find_bmu_pair(const Input& x, const Codebook& cb,
                      DistanceMode mode = DistanceMode::euclidean_full, unsigned workers = 1) {
  const auto pc = prepare_codebook(cb, backend_of<Input>(), mode);
  const auto chi = chi_init(x);
  BmuPair out;
  search_bmus(x, cb, pc, chi, workers, out);
  return out;
}

}  // namespace sombra
