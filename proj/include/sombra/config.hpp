#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sombra/error.hpp"

namespace sombra {

/// How article-to-node distances are scored during the BMU search.
enum class DistanceMode {
  /// s_k + chi_i - 2 x_i.w_k, the exact squared Euclidean distance.
  euclidean_full,
  /// D_a - 2 x_i.(w_k / |w_k|), the index-only form against an L2-normalized codebook.
  normalized_reduced,
};

/// When two grid nodes count as neighbours for the topographic error.
enum class AdjacencyMode {
  manhattan1,  ///< |dx| + |dy| <= 1
  chebyshev1,  ///< max(|dx|, |dy|) <= 1
};

/// Input representation, one per training kernel.
enum class Backend { dense, sparse, binary };

inline std::string_view to_string(DistanceMode m) {
  return m == DistanceMode::euclidean_full ? "euclidean_full" : "normalized_reduced";
}
inline std::string_view to_string(AdjacencyMode m) {
  return m == AdjacencyMode::manhattan1 ? "manhattan1" : "chebyshev1";
}
inline std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::dense: return "dense";
    case Backend::sparse: return "sparse";
    case Backend::binary: return "binary";
  }
  return "?";
}

inline DistanceMode parse_distance_mode(std::string_view s) {
  if (s == "euclidean_full") return DistanceMode::euclidean_full;
  if (s == "normalized_reduced") return DistanceMode::normalized_reduced;
  throw ArgumentError("unknown distance mode '" + std::string(s) + "'");
}
inline AdjacencyMode parse_adjacency_mode(std::string_view s) {
  if (s == "manhattan1") return AdjacencyMode::manhattan1;
  if (s == "chebyshev1") return AdjacencyMode::chebyshev1;
  throw ArgumentError("unknown adjacency mode '" + std::string(s) + "'");
}
inline Backend parse_backend(std::string_view s) {
  if (s == "dense") return Backend::dense;
  if (s == "sparse" || s == "value") return Backend::sparse;
  if (s == "binary") return Backend::binary;
  throw ArgumentError("unknown backend '" + std::string(s) + "'");
}

struct TrainConfig {
  std::size_t side_x = 0;
  std::size_t side_y = 0;
  /// Expected input dimension D; checked against the data when set.
  std::optional<std::size_t> dim;
  /// Number of epochs K; derived from sigma0 and decay when unset.
  std::optional<int> epochs;
  double decay = 1.7;
  /// Initial radius; min(side_x, side_y) / 2 when unset.
  std::optional<double> sigma0;
  DistanceMode distance_mode = DistanceMode::euclidean_full;
  AdjacencyMode adjacency_mode = AdjacencyMode::manhattan1;
  /// Zero the neighbourhood beyond cutoff * sigma grid units. Off when unset.
  std::optional<double> cutoff;
  std::uint64_t seed = 0;
  bool deterministic_reduction = false;
  unsigned workers = 1;
  /// Nodes whose accumulated denominator falls below this keep their weights.
  double starvation_eps = 1e-12;

  double resolved_sigma0() const {
    return sigma0 ? *sigma0 : static_cast<double>(std::min(side_x, side_y)) / 2.0;
  }

  /// ceil(log_decay(sigma0)) + 2: sigma drops below one grid unit, then two
  /// refinement epochs.
  int resolved_epochs() const {
    if (epochs) return *epochs;
    const double k = std::ceil(std::log(resolved_sigma0()) / std::log(decay));
    return std::max(1, static_cast<int>(k) + 2);
  }

  void validate() const {
    if (side_x == 0 || side_y == 0 || side_x * side_y < 2) {
      throw ArgumentError("grid must have at least 2 nodes, got " + std::to_string(side_x) + "x" +
                          std::to_string(side_y));
    }
    if (epochs && *epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (!(decay > 1.0) || !std::isfinite(decay)) {
      throw ArgumentError("decay must be > 1, got " + std::to_string(decay));
    }
    if (!(resolved_sigma0() > 0.0) || !std::isfinite(resolved_sigma0())) {
      throw ArgumentError("sigma0 must be > 0");
    }
    if (cutoff && !(*cutoff > 0.0)) throw ArgumentError("cutoff must be > 0");
    if (workers == 0) throw ArgumentError("workers must be >= 1");
    if (!(starvation_eps >= 0.0)) throw ArgumentError("starvation_eps must be >= 0");
  }
};

}  // namespace sombra
