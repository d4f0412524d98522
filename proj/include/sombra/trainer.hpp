#pragma once

#include <chrono>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sombra/bmu.hpp"
#include "sombra/codebook.hpp"
#include "sombra/config.hpp"
#include "sombra/distance.hpp"
#include "sombra/neighborhood.hpp"
#include "sombra/quality.hpp"
#include "sombra/update.hpp"

namespace sombra {

/// Observability record for one epoch. The errors describe the codebook that
/// entered the epoch, measured on that epoch's BMU pass.
struct EpochReport {
  int epoch = 0;
  double sigma = 0.0;
  double quantization_error = 0.0;
  double topographic_error = 0.0;
  double bmu_seconds = 0.0;
  double update_seconds = 0.0;
};

inline nlohmann::json to_json(const EpochReport& r) {
  return {{"epoch", r.epoch},
          {"sigma", r.sigma},
          {"quantization_error", r.quantization_error},
          {"topographic_error", r.topographic_error},
          {"bmu_seconds", r.bmu_seconds},
          {"update_seconds", r.update_seconds}};
}

inline void write_report_jsonl(std::ostream& out, const std::vector<EpochReport>& reports) {
  for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

/// Per-run buffers reused across epochs.
struct EpochScratch {
  std::vector<double> chi;
  BmuPair bmus;
  PreparedCodebook prepared;
};

/// Batch SOM trainer over one input representation. Owns the per-run scratch;
/// not shareable between threads while an epoch runs.
template <class Input>
class Trainer {
public:
  Trainer(const Input& x, TrainConfig cfg) : x_(x), cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.dim && *cfg_.dim != x_.n_cols()) {
      throw ArgumentError("configured dimension " + std::to_string(*cfg_.dim) +
                          " does not match input dimension " + std::to_string(x_.n_cols()));
    }
    scratch_.chi = chi_init(x_);
  }

  const TrainConfig& config() const noexcept { return cfg_; }
  const EpochScratch& scratch() const noexcept { return scratch_; }

  /// One epoch: sigma, codebook preparation, BMU pass, accumulate, apply, metrics.
  std::pair<Codebook, EpochReport> train_epoch(const Codebook& cb, int epoch) {
    check_codebook(cb);
    if (epoch < 1) throw ArgumentError("epoch index starts at 1");
    using clock = std::chrono::steady_clock;
    EpochReport report;
    report.epoch = epoch;
    report.sigma = sigma_at(cfg_, epoch);

    const auto t0 = clock::now();
    prepare_codebook(cb, backend_of<Input>(), cfg_.distance_mode, scratch_.prepared);
    search_bmus(x_, cb, scratch_.prepared, scratch_.chi, cfg_.workers, scratch_.bmus);
    const auto t1 = clock::now();

    const auto acc = accumulate_updates(x_, scratch_.bmus.bmu1, report.sigma, cb.grid(),
                                        cfg_.cutoff, cfg_.deterministic_reduction, cfg_.workers);
    Codebook next = apply_updates(cb, acc, cfg_.starvation_eps);
    const auto t2 = clock::now();

    if (x_.n_rows() > 0) {
      report.quantization_error = quantization_error(scratch_.bmus.dst1);
      report.topographic_error = topographic_error(scratch_.bmus.bmu1, scratch_.bmus.bmu2,
                                                   cb.grid(), cfg_.adjacency_mode);
    }
    report.bmu_seconds = std::chrono::duration<double>(t1 - t0).count();
    report.update_seconds = std::chrono::duration<double>(t2 - t1).count();
    return {std::move(next), report};
  }

private:
  void check_codebook(const Codebook& cb) const {
    if (cb.side_x() != cfg_.side_x || cb.side_y() != cfg_.side_y) {
      throw ArgumentError("codebook grid does not match the configured grid");
    }
    if (cb.dim() != x_.n_cols()) {
      throw ArgumentError("input has " + std::to_string(x_.n_cols()) +
                          " columns but codebook dimension is " + std::to_string(cb.dim()));
    }
  }

  const Input& x_;
  TrainConfig cfg_;
  EpochScratch scratch_;
};

template <class Input>
std::pair<Codebook, EpochReport> train_epoch(const Input& x, const Codebook& cb,
                                             const TrainConfig& cfg, int epoch) {
  Trainer<Input> trainer(x, cfg);
  return trainer.train_epoch(cb, epoch);
}

struct TrainResult {
  Codebook codebook;
  std::vector<EpochReport> reports;
};

/// Called after every epoch with the report and the BMU assignment of that epoch.
using EpochObserver = std::function<void(const EpochReport&, const BmuPair&)>;

/// Runs all epochs from a given initial codebook.
template <class Input>
TrainResult train(const Input& x, const TrainConfig& cfg, Codebook initial,
                  const EpochObserver& observer = {}) {
  Trainer<Input> trainer(x, cfg);
  TrainResult result{std::move(initial), {}};
  const int epochs = cfg.resolved_epochs();
  result.reports.reserve(static_cast<std::size_t>(epochs));
  for (int e = 1; e <= epochs; ++e) {
    auto [next, report] = trainer.train_epoch(result.codebook, e);
    result.codebook = std::move(next);
    if (observer) observer(report, trainer.scratch().bmus);
    result.reports.push_back(report);
  }
  return result;
}

/// Runs all epochs from a random codebook seeded by cfg.seed.
template <class Input>
TrainResult train(const Input& x, const TrainConfig& cfg, const EpochObserver& observer = {}) {
  cfg.validate();
  if (x.n_cols() == 0) throw ArgumentError("input has no columns");
  return train(x, cfg, init_codebook(cfg.side_x, cfg.side_y, x.n_cols(), cfg.seed), observer);
}

}  // namespace sombra
