// Trains a small map on clustered synthetic data and writes the U-matrix and
// hit counts next to the working directory.
//
//   sombra_quickstart [out_prefix]

#include <algorithm>
#include <array>
#include <fstream>
#include <iostream>
#include <string>

#include "sombra/sombra.hpp"

int main(int argc, char** argv) {
  const std::string prefix = argc > 1 ? argv[1] : "quickstart";
  try {
    std::vector<std::uint32_t> cluster;
    const auto x = sombra::synth_generate({.n = 3000, .d = 400, .seed = 7, .clusters = 4}, &cluster);

    sombra::TrainConfig cfg;
    cfg.side_x = 12;
    cfg.side_y = 12;
    cfg.seed = 1;
    cfg.workers = sombra::default_workers();

    const auto result = sombra::train(x, cfg, [](const sombra::EpochReport& r, const sombra::BmuPair&) {
      std::cout << "epoch " << r.epoch << "  sigma " << r.sigma << "  qe " << r.quantization_error
                << "  te " << r.topographic_error << '\n';
    });

    sombra::BmuPair bmus;
    const auto q = sombra::evaluate_quality(x, result.codebook, sombra::AdjacencyMode::manhattan1,
                                            cfg.workers, &bmus);
    std::cout << sombra::to_json(q).dump() << '\n';

    const auto u = sombra::umatrix(result.codebook);
    std::ofstream uout(prefix + ".umatrix.csv");
    sombra::write_grid_csv<float>(uout, result.codebook.grid(), u.data());
    const auto hits = sombra::bmu_density(bmus.bmu1, result.codebook.grid());
    std::ofstream hout(prefix + ".density.csv");
    sombra::write_grid_csv<std::uint64_t>(hout, result.codebook.grid(), hits);
    sombra::write_somc(result.codebook, prefix + ".somc");

    // Majority cluster per node; clustered input should give four contiguous regions.
    const auto& grid = result.codebook.grid();
    std::vector<std::array<std::size_t, 4>> votes(grid.n_nodes());
    for (std::size_t i = 0; i < bmus.size(); ++i) ++votes[bmus.bmu1[i]][cluster[i]];
    for (std::size_t y = 0; y < grid.side_y; ++y) {
      for (std::size_t x_ = 0; x_ < grid.side_x; ++x_) {
        const auto& v = votes[y * grid.side_x + x_];
        const auto best = std::max_element(v.begin(), v.end());
        std::cout << (*best == 0 ? '.' : static_cast<char>('A' + (best - v.begin())));
      }
      std::cout << '\n';
    }
  } catch (const sombra::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
