#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sombra/bmu.hpp"
#include "sombra/codebook.hpp"
#include "sombra/config.hpp"
#include "sombra/matrix.hpp"

namespace sombra {

/// Grid adjacency of two nodes. A node is adjacent to itself.
inline bool adjacent(NodeIndex a, NodeIndex b, const GridGeometry& grid, AdjacencyMode mode) {
  const auto pa = grid.position(a);
  const auto pb = grid.position(b);
  const auto dx = std::llabs(pa.x - pb.x);
  const auto dy = std::llabs(pa.y - pb.y);
  return mode == AdjacencyMode::manhattan1 ? dx + dy <= 1 : std::max(dx, dy) <= 1;
}

/// Fraction of articles whose two best units are not grid-adjacent.
inline double topographic_error(std::span<const NodeIndex> bmu1, std::span<const NodeIndex> bmu2,
                                const GridGeometry& grid, AdjacencyMode mode) {
  if (bmu1.empty()) throw ArgumentError("topographic error of an empty assignment");
  if (bmu1.size() != bmu2.size()) throw ArgumentError("bmu1 and bmu2 lengths differ");
  std::size_t apart = 0;
  for (std::size_t i = 0; i < bmu1.size(); ++i) {
    if (!adjacent(bmu1[i], bmu2[i], grid, mode)) ++apart;
  }
  return static_cast<double>(apart) / static_cast<double>(bmu1.size());
}

/// Mean squared distance from each article to its best unit.
inline double quantization_error(std::span<const double> dst1) {
  if (dst1.empty()) throw ArgumentError("quantization error of an empty assignment");
  double s = 0.0;
  for (double d : dst1) s += d;
  return s / static_cast<double>(dst1.size());
}

/// side_y x side_x grid; cell (y, x) is the mean Euclidean distance from the
/// node at (x, y) to its existing 4-neighbours.
inline DenseMatrix umatrix(const Codebook& cb) {
  const auto& g = cb.grid();
  DenseMatrix out(g.side_y, g.side_x);
  auto dist = [&](std::size_t a, std::size_t b) {
    auto wa = cb.node(a);
    auto wb = cb.node(b);
    double s = 0.0;
    for (std::size_t j = 0; j < cb.dim(); ++j) {
      const double diff = static_cast<double>(wa[j]) - static_cast<double>(wb[j]);
      s += diff * diff;
    }
    return std::sqrt(s);
  };
  constexpr int kOffsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  for (std::size_t y = 0; y < g.side_y; ++y) {
    for (std::size_t x = 0; x < g.side_x; ++x) {
      const std::size_t k = y * g.side_x + x;
      double total = 0.0;
      int count = 0;
      for (const auto& o : kOffsets) {
        const auto nx = static_cast<std::int64_t>(x) + o[0];
        const auto ny = static_cast<std::int64_t>(y) + o[1];
        if (nx < 0 || ny < 0 || nx >= static_cast<std::int64_t>(g.side_x) ||
            ny >= static_cast<std::int64_t>(g.side_y)) {
          continue;
        }
        total += dist(k, g.node_at(GridPos{nx, ny}));
        ++count;
      }
      out(y, x) = count ? static_cast<float>(total / count) : 0.0f;
    }
  }
  return out;
}

/// Articles mapped to each node, as a side_y x side_x grid of counts.
inline std::vector<std::uint64_t> bmu_density(std::span<const NodeIndex> bmu1,
                                              const GridGeometry& grid) {
  std::vector<std::uint64_t> counts(grid.n_nodes(), 0);
  for (auto b : bmu1) {
    if (b >= counts.size()) throw ArgumentError("bmu index outside the grid");
    ++counts[b];
  }
  return counts;
}

struct QualityReport {
  double topographic_error = 0.0;
  double quantization_error = 0.0;
  std::size_t n_articles = 0;
  AdjacencyMode adjacency = AdjacencyMode::manhattan1;
};

inline nlohmann::json to_json(const QualityReport& r) {
  return {{"topographic_error", r.topographic_error},
          {"quantization_error", r.quantization_error},
          {"n_articles", r.n_articles},
          {"adjacency", std::string(to_string(r.adjacency))}};
}

/// Maps every article (euclidean_full search) and scores the codebook.
template <class Input>
QualityReport evaluate_quality(const Input& x, const Codebook& cb, AdjacencyMode adjacency,
                               unsigned workers = 1, BmuPair* bmus_out = nullptr) {
  auto bmus = find_bmu_pair(x, cb, DistanceMode::euclidean_full, workers);
  QualityReport r;
  r.n_articles = bmus.size();
  r.adjacency = adjacency;
  r.topographic_error = topographic_error(bmus.bmu1, bmus.bmu2, cb.grid(), adjacency);
  r.quantization_error = quantization_error(bmus.dst1);
  if (bmus_out) *bmus_out = std::move(bmus);
  return r;
}

/// Grid CSV: a `# side_x=W side_y=H` header line, then side_y rows of side_x values.
template <class T>
void write_grid_csv(std::ostream& out, const GridGeometry& grid, std::span<const T> values) {
  out << "# side_x=" << grid.side_x << " side_y=" << grid.side_y << '\n';
  const auto precision = out.precision(9);
  for (std::size_t y = 0; y < grid.side_y; ++y) {
    for (std::size_t x = 0; x < grid.side_x; ++x) {
      if (x) out << ',';
      out << values[y * grid.side_x + x];
    }
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace sombra
