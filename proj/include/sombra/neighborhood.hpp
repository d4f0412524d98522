#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <vector>

#include "sombra/codebook.hpp"
#include "sombra/config.hpp"

namespace sombra {

/// Neighbourhood radius for epoch e (1-based): sigma0 / decay^e.
inline double sigma_at(const TrainConfig& cfg, int epoch) {
  if (epoch < 1) throw ArgumentError("epoch index starts at 1, got " + std::to_string(epoch));
  return cfg.resolved_sigma0() / std::pow(cfg.decay, epoch);
}

/// Gaussian coupling exp(-|a-b|^2 / (2 sigma^2)) between two grid positions.
inline double neighborhood_h(GridPos a, GridPos b, double sigma,
                             std::optional<double> cutoff = std::nullopt) {
  const double dx = static_cast<double>(a.x - b.x);
  const double dy = static_cast<double>(a.y - b.y);
  const double r2 = dx * dx + dy * dy;
  if (cutoff && std::sqrt(r2) > *cutoff * sigma) return 0.0;
  return std::exp(-r2 / (2.0 * sigma * sigma));
}

/// h for every grid offset (|dx|, |dy|) at a fixed sigma. Entries equal
/// neighborhood_h exactly.
class NeighborhoodTable {
public:
  NeighborhoodTable(const GridGeometry& grid, double sigma, std::optional<double> cutoff)
      : grid_(grid), table_(grid.side_x * grid.side_y) {
    for (std::size_t dy = 0; dy < grid.side_y; ++dy) {
      for (std::size_t dx = 0; dx < grid.side_x; ++dx) {
        table_[dy * grid.side_x + dx] =
            neighborhood_h(GridPos{0, 0},
                           GridPos{static_cast<std::int64_t>(dx), static_cast<std::int64_t>(dy)},
                           sigma, cutoff);
      }
    }
  }

  double operator()(std::size_t k, std::size_t c) const noexcept {
    const auto a = grid_.position(k);
    const auto b = grid_.position(c);
    return table_[static_cast<std::size_t>(std::llabs(a.y - b.y)) * grid_.side_x +
                  static_cast<std::size_t>(std::llabs(a.x - b.x))];
  }

private:
  GridGeometry grid_;
  std::vector<double> table_;
};

}  // namespace sombra
