#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sombra/error.hpp"
#include "sombra/matrix.hpp"

namespace sombra {

using NodeIndex = std::uint32_t;

struct GridPos {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const GridPos&, const GridPos&) = default;
};

/// Rectangular node grid; node k sits at (k mod side_x, k div side_x).
struct GridGeometry {
  std::size_t side_x = 0;
  std::size_t side_y = 0;

  std::size_t n_nodes() const noexcept { return side_x * side_y; }
  GridPos position(std::size_t k) const noexcept {
    return {static_cast<std::int64_t>(k % side_x), static_cast<std::int64_t>(k / side_x)};
  }
  std::size_t node_at(GridPos p) const noexcept {
    return static_cast<std::size_t>(p.y) * side_x + static_cast<std::size_t>(p.x);
  }
  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// M = side_x * side_y dense weight rows of length dim, stored as floats.
class Codebook {
public:
  Codebook() = default;

  Codebook(GridGeometry grid, std::size_t dim)
      : grid_(grid), dim_(dim) {
    check_shape();
    weights_.assign(detail::checked_product(grid_.n_nodes(), dim_, "codebook"), 0.0f);
  }

  Codebook(GridGeometry grid, std::size_t dim, std::vector<float> weights)
      : grid_(grid), dim_(dim), weights_(std::move(weights)) {
    check_shape();
    if (weights_.size() != detail::checked_product(grid_.n_nodes(), dim_, "codebook")) {
      throw ArgumentError("codebook weight count does not match grid and dimension");
    }
    for (float w : weights_) {
      if (!std::isfinite(w)) throw ArgumentError("codebook holds a non-finite weight");
    }
  }

  const GridGeometry& grid() const noexcept { return grid_; }
  std::size_t side_x() const noexcept { return grid_.side_x; }
  std::size_t side_y() const noexcept { return grid_.side_y; }
  std::size_t n_nodes() const noexcept { return grid_.n_nodes(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> node(std::size_t k) const noexcept {
    return {weights_.data() + k * dim_, dim_};
  }
  std::span<float> node(std::size_t k) noexcept { return {weights_.data() + k * dim_, dim_}; }

  std::span<const float> weights() const noexcept { return weights_; }
  std::span<float> weights() noexcept { return weights_; }

  friend bool operator==(const Codebook&, const Codebook&) = default;

private:
  void check_shape() const {
    if (grid_.side_x == 0 || grid_.side_y == 0 || dim_ == 0) {
      throw ArgumentError("codebook needs non-zero side_x, side_y and dim");
    }
    if (grid_.n_nodes() < 2) {
      throw ArgumentError("codebook needs at least 2 nodes (second BMU must exist)");
    }
  }

  GridGeometry grid_;
  std::size_t dim_ = 0;
  std::vector<float> weights_;
};

namespace detail {

/// Uniform float in [0,1) from the top 24 bits of a 64-bit draw. Portable
/// across standard libraries, unlike std::uniform_real_distribution.
inline float unit_float(std::mt19937_64& rng) {
  return static_cast<float>(rng() >> 40) * 0x1.0p-24f;
}

/// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

}  // namespace detail

/// Random codebook with every weight uniform in [0,1). Same seed, same weights.
inline Codebook init_codebook(std::size_t side_x, std::size_t side_y, std::size_t dim,
                              std::uint64_t seed) {
  Codebook cb(GridGeometry{side_x, side_y}, dim);
  std::mt19937_64 rng(seed);
  for (float& w : cb.weights()) w = detail::unit_float(rng);
  return cb;
}

}  // namespace sombra
