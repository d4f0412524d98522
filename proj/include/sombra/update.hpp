#pragma once

#include <algorithm>
#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include "sombra/codebook.hpp"
#include "sombra/matrix.hpp"
#include "sombra/neighborhood.hpp"
#include "sombra/parallel.hpp"

namespace sombra {

/// Batch-update numerators (M x D) and denominators (M) for one epoch:
///   den_k = sum_i h(r_k, r_bmu1(i)),  num_k = sum_i h(r_k, r_bmu1(i)) x_i
struct UpdateAccumulator {
  std::size_t n_nodes = 0;
  std::size_t dim = 0;
  std::vector<double> num;
  std::vector<double> den;

  std::span<const double> num_row(std::size_t k) const noexcept {
    return {num.data() + k * dim, dim};
  }
};

namespace detail {

/// Adds article i into a dense D-vector. Binary rows add 1 at each stored
/// column, no multiply.
template <class Input>
void add_row(const Input& x, std::size_t i, double* dst) {
  if constexpr (std::is_same_v<Input, SparseBinaryMatrix>) {
    for (auto j : x.row(i)) dst[j] += 1.0;
  } else if constexpr (std::is_same_v<Input, SparseValueMatrix>) {
    auto cols = x.row(i);
    auto vals = x.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) dst[cols[p]] += static_cast<double>(vals[p]);
  } else {
    auto row = x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) dst[j] += static_cast<double>(row[j]);
  }
}

}  // namespace detail

/// Accumulates the epoch's numerators and denominators.
///
/// Articles are first summed per winning node (count_c, S_c); every node then
/// collects sum_c h(k,c) S_c over the winning nodes. With
/// `deterministic` set the per-node sums run in ascending article order, so
/// the result is bit-identical for any worker count. Otherwise each worker
/// sums a contiguous slice of articles privately and the partial sums are
/// merged in completion order.
template <class Input>
UpdateAccumulator accumulate_updates(const Input& x, std::span<const NodeIndex> bmu1,
                                     double sigma, const GridGeometry& grid,
                                     std::optional<double> cutoff = std::nullopt,
                                     bool deterministic = true, unsigned workers = 1) {
  const std::size_t n = x.n_rows();
  const std::size_t m = grid.n_nodes();
  const std::size_t d = x.n_cols();
  if (bmu1.size() != n) throw ArgumentError("bmu1 length does not match article count");
  for (auto b : bmu1) {
    if (b >= m) throw ArgumentError("bmu index " + std::to_string(b) + " outside the grid");
  }

  std::vector<double> sums(detail::checked_product(m, d, "update buffer"), 0.0);
  std::vector<double> counts(m, 0.0);

  if (deterministic) {
    // Bucket articles by winning node, preserving article order.
    std::vector<std::size_t> start(m + 1, 0);
    for (auto b : bmu1) ++start[b + 1];
    for (std::size_t c = 0; c < m; ++c) start[c + 1] += start[c];
    std::vector<std::size_t> order(n);
    {
      std::vector<std::size_t> fill(start.begin(), start.end() - 1);
      for (std::size_t i = 0; i < n; ++i) order[fill[bmu1[i]]++] = i;
    }
    parallel_for(workers, m, [&](std::size_t c0, std::size_t c1, unsigned) {
      for (std::size_t c = c0; c < c1; ++c) {
        double* dst = sums.data() + c * d;
        for (std::size_t p = start[c]; p < start[c + 1]; ++p) detail::add_row(x, order[p], dst);
        counts[c] = static_cast<double>(start[c + 1] - start[c]);
      }
    });
  } else {
    std::mutex merge_mutex;
    parallel_for(workers, n, [&](std::size_t i0, std::size_t i1, unsigned) {
      std::vector<double> local(sums.size(), 0.0);
      std::vector<double> local_counts(m, 0.0);
      for (std::size_t i = i0; i < i1; ++i) {
        detail::add_row(x, i, local.data() + static_cast<std::size_t>(bmu1[i]) * d);
        local_counts[bmu1[i]] += 1.0;
      }
      std::lock_guard lock(merge_mutex);
      for (std::size_t q = 0; q < sums.size(); ++q) sums[q] += local[q];
      for (std::size_t c = 0; c < m; ++c) counts[c] += local_counts[c];
    });
  }

  std::vector<std::size_t> winners;
  for (std::size_t c = 0; c < m; ++c) {
    if (counts[c] > 0.0) winners.push_back(c);
  }

  const NeighborhoodTable h(grid, sigma, cutoff);
  UpdateAccumulator acc;
  acc.n_nodes = m;
  acc.dim = d;
  acc.num.assign(sums.size(), 0.0);
  acc.den.assign(m, 0.0);
  parallel_for(workers, m, [&](std::size_t k0, std::size_t k1, unsigned) {
    for (std::size_t k = k0; k < k1; ++k) {
      double* num = acc.num.data() + k * d;
      double den = 0.0;
      for (auto c : winners) {
        const double w = h(k, c);
        if (w == 0.0) continue;
        den += w * counts[c];
        const double* s = sums.data() + c * d;
        for (std::size_t j = 0; j < d; ++j) num[j] += w * s[j];
      }
      acc.den[k] = den;
    }
  });
  return acc;
}

/// New weights num_k / den_k. Nodes with den_k < eps keep their weights.
inline Codebook apply_updates(const Codebook& cb, const UpdateAccumulator& acc,
                              double eps = 1e-12) {
  if (acc.n_nodes != cb.n_nodes() || acc.dim != cb.dim()) {
    throw ArgumentError("update accumulator shape does not match codebook");
  }
  Codebook out = cb;
  for (std::size_t k = 0; k < cb.n_nodes(); ++k) {
    const double den = acc.den[k];
    if (!(den >= eps) || den == 0.0) continue;
    auto dst = out.node(k);
    auto num = acc.num_row(k);
    for (std::size_t j = 0; j < cb.dim(); ++j) dst[j] = static_cast<float>(num[j] / den);
  }
  return out;
}

}  // namespace sombra
