#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sombra/error.hpp"

namespace sombra {

using ColumnId = std::uint32_t;
using RowOffset = std::uint64_t;

namespace detail {

/// Returns a description of the first CSR invariant violated, if any.
inline std::optional<std::string> csr_violation(std::size_t n_rows, std::size_t n_cols,
                                                std::span<const RowOffset> offsets,
                                                std::span<const ColumnId> indices) {
  if (offsets.size() != n_rows + 1) {
    return "offsets length " + std::to_string(offsets.size()) + " != n_rows + 1";
  }
  if (offsets.front() != 0) return std::string("offsets[0] != 0");
  if (offsets.back() != indices.size()) {
    return "offsets[N] = " + std::to_string(offsets.back()) + " but nnz = " +
           std::to_string(indices.size());
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (offsets[i + 1] < offsets[i]) {
      return "offsets decrease at row " + std::to_string(i);
    }
    for (RowOffset p = offsets[i]; p < offsets[i + 1]; ++p) {
      if (indices[p] >= n_cols) {
        return "row " + std::to_string(i) + ": column " + std::to_string(indices[p]) +
               " >= n_cols " + std::to_string(n_cols);
      }
      if (p > offsets[i] && indices[p] <= indices[p - 1]) {
        return "row " + std::to_string(i) + ": columns not strictly increasing";
      }
    }
  }
  return std::nullopt;
}

inline std::size_t checked_product(std::size_t a, std::size_t b, const char* what) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    throw CapacityError(std::string(what) + ": size overflow");
  }
  return a * b;
}

}  // namespace detail

/// Index-only CSR incidence matrix: row i holds the sorted column ids present
/// in article i. Immutable after construction.
class SparseBinaryMatrix {
public:
  SparseBinaryMatrix() : offsets_{0} {}

  /// Validates and adopts CSR arrays. Throws ArgumentError on any violation.
  SparseBinaryMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<RowOffset> offsets,
                     std::vector<ColumnId> indices)
      : n_rows_(n_rows), n_cols_(n_cols), offsets_(std::move(offsets)),
        indices_(std::move(indices)) {
    if (n_cols_ > std::numeric_limits<ColumnId>::max()) {
      throw ArgumentError("n_cols exceeds 32-bit column id range");
    }
    if (auto v = detail::csr_violation(n_rows_, n_cols_, offsets_, indices_)) {
      throw ArgumentError("invalid CSR structure: " + *v);
    }
  }

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return indices_.size(); }

  std::span<const RowOffset> offsets() const noexcept { return offsets_; }
  std::span<const ColumnId> indices() const noexcept { return indices_; }

  std::span<const ColumnId> row(std::size_t i) const noexcept {
    return {indices_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
  }
  /// Number of columns present in row i.
  std::size_t row_nnz(std::size_t i) const noexcept {
    return static_cast<std::size_t>(offsets_[i + 1] - offsets_[i]);
  }

  friend bool operator==(const SparseBinaryMatrix&, const SparseBinaryMatrix&) = default;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<RowOffset> offsets_;
  std::vector<ColumnId> indices_;
};

/// CSR with one float value per stored column (LibSVM-style rows).
class SparseValueMatrix {
public:
  SparseValueMatrix() : offsets_{0} {}

  SparseValueMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<RowOffset> offsets,
                    std::vector<ColumnId> indices, std::vector<float> values)
      : n_rows_(n_rows), n_cols_(n_cols), offsets_(std::move(offsets)),
        indices_(std::move(indices)), values_(std::move(values)) {
    if (n_cols_ > std::numeric_limits<ColumnId>::max()) {
      throw ArgumentError("n_cols exceeds 32-bit column id range");
    }
    if (auto v = detail::csr_violation(n_rows_, n_cols_, offsets_, indices_)) {
      throw ArgumentError("invalid CSR structure: " + *v);
    }
    if (values_.size() != indices_.size()) {
      throw ArgumentError("values length " + std::to_string(values_.size()) +
                          " != indices length " + std::to_string(indices_.size()));
    }
    for (std::size_t p = 0; p < values_.size(); ++p) {
      if (!std::isfinite(values_[p])) {
        throw ArgumentError("non-finite value at position " + std::to_string(p));
      }
    }
  }

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return indices_.size(); }

  std::span<const RowOffset> offsets() const noexcept { return offsets_; }
  std::span<const ColumnId> indices() const noexcept { return indices_; }
  std::span<const float> values() const noexcept { return values_; }

  std::span<const ColumnId> row(std::size_t i) const noexcept {
    return {indices_.data() + offsets_[i], row_nnz(i)};
  }
  std::span<const float> row_values(std::size_t i) const noexcept {
    return {values_.data() + offsets_[i], row_nnz(i)};
  }
  std::size_t row_nnz(std::size_t i) const noexcept {
    return static_cast<std::size_t>(offsets_[i + 1] - offsets_[i]);
  }

  friend bool operator==(const SparseValueMatrix&, const SparseValueMatrix&) = default;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<RowOffset> offsets_;
  std::vector<ColumnId> indices_;
  std::vector<float> values_;
};

/// Row-major dense matrix of 4-byte floats.
class DenseMatrix {
public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t n_rows, std::size_t n_cols)
      : n_rows_(n_rows), n_cols_(n_cols) {
    const auto n = detail::checked_product(n_rows, n_cols, "dense matrix");
    try {
      data_.assign(n, 0.0f);
    } catch (const std::bad_alloc&) {
      throw CapacityError("dense matrix of " + std::to_string(n_rows) + "x" +
                          std::to_string(n_cols) + " floats does not fit in memory");
    }
  }

  DenseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<float> data)
      : n_rows_(n_rows), n_cols_(n_cols), data_(std::move(data)) {
    if (data_.size() != detail::checked_product(n_rows, n_cols, "dense matrix")) {
      throw ArgumentError("dense data length does not match shape");
    }
    if (!std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); })) {
      throw ArgumentError("dense matrix holds a non-finite entry");
    }
  }

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }

  float operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_cols_ + j]; }
  float& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_cols_ + j]; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * n_cols_, n_cols_};
  }
  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<float> data_;
};

/// Builds a binary CSR matrix from per-row column-id lists. Duplicates are
/// dropped and ids sorted. Throws OutOfRangeError naming the row and id when
/// an id is not below n_cols.
template <class Rows>
SparseBinaryMatrix sbm_from_rows(const Rows& rows, std::size_t n_cols) {
  std::vector<RowOffset> offsets;
  std::vector<ColumnId> indices;
  offsets.reserve(std::size(rows) + 1);
  offsets.push_back(0);
  std::vector<ColumnId> scratch;
  std::size_t i = 0;
  for (const auto& r : rows) {
    scratch.assign(std::begin(r), std::end(r));
    for (auto id : scratch) {
      if (static_cast<std::uint64_t>(id) >= n_cols) {
        throw OutOfRangeError("row " + std::to_string(i) + ": column id " + std::to_string(id) +
                              " >= n_cols " + std::to_string(n_cols));
      }
    }
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    indices.insert(indices.end(), scratch.begin(), scratch.end());
    offsets.push_back(indices.size());
    ++i;
  }
  return SparseBinaryMatrix(i, n_cols, std::move(offsets), std::move(indices));
}

inline DenseMatrix sbm_to_dense(const SparseBinaryMatrix& m) {
  DenseMatrix out(m.n_rows(), m.n_cols());
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    for (auto j : m.row(i)) out(i, j) = 1.0f;
  }
  return out;
}

/// Column ids of the nonzero entries of each dense row.
inline std::vector<std::vector<ColumnId>> nonzero_rows(const DenseMatrix& m) {
  std::vector<std::vector<ColumnId>> rows(m.n_rows());
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] != 0.0f) rows[i].push_back(static_cast<ColumnId>(j));
    }
  }
  return rows;
}

/// Same structure, every stored value 1.0.
inline SparseValueMatrix svm_from_sbm(const SparseBinaryMatrix& m) {
  return SparseValueMatrix(m.n_rows(), m.n_cols(),
                           std::vector<RowOffset>(m.offsets().begin(), m.offsets().end()),
                           std::vector<ColumnId>(m.indices().begin(), m.indices().end()),
                           std::vector<float>(m.nnz(), 1.0f));
}

inline DenseMatrix svm_to_dense(const SparseValueMatrix& m) {
  DenseMatrix out(m.n_rows(), m.n_cols());
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    auto cols = m.row(i);
    auto vals = m.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) out(i, cols[p]) = vals[p];
  }
  return out;
}

}  // namespace sombra
