#pragma once

// Timing harness for the BMU pass. One timed cycle is codebook preparation
// plus the full (bmu1, bmu2) search; chi is computed once per input, as in
// training, and is not timed.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sombra/bmu.hpp"
#include "sombra/codebook.hpp"
#include "sombra/config.hpp"
#include "sombra/ingest.hpp"
#include "sombra/matrix.hpp"
#include "sombra/memmodel.hpp"

namespace sombra {

struct BenchResult {
  Backend backend = Backend::binary;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t m = 0;
  double avg_nnz = 0.0;
  int reps = 0;
  unsigned workers = 1;
  double median_seconds = 0.0;
  double min_seconds = 0.0;
  /// median / (N * M) in nanoseconds.
  double ns_per_pair = 0.0;
  /// Sum over articles of bmu1 * M + bmu2, identical for every rep.
  std::uint64_t checksum = 0;
  std::vector<double> samples;
};

inline std::uint64_t bmu_checksum(const BmuPair& p, std::size_t m) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += static_cast<std::uint64_t>(p.bmu1[i]) * m + p.bmu2[i];
  }
  return s;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw ArgumentError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const auto h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// A repeatable BMU cycle over one input, returning the pass's checksum.
class BmuCycle {
public:
  template <class Input>
  BmuCycle(const Input& x, const Codebook& cb, unsigned workers,
           DistanceMode mode = DistanceMode::euclidean_full)
      : backend_(backend_of<Input>()), n_(x.n_rows()), d_(x.n_cols()), m_(cb.n_nodes()),
        avg_nnz_(average_nnz(x)), workers_(workers) {
    if (x.n_cols() != cb.dim()) {
      throw ArgumentError("input has " + std::to_string(x.n_cols()) +
                          " columns but codebook dimension is " + std::to_string(cb.dim()));
    }
    auto chi = std::make_shared<std::vector<double>>(chi_init(x));
    auto out = std::make_shared<BmuPair>();
    auto pc = std::make_shared<PreparedCodebook>();
    run_ = [&x, &cb, workers, mode, chi, out, pc]() {
      prepare_codebook(cb, backend_of<Input>(), mode, *pc);
      search_bmus(x, cb, *pc, *chi, workers, *out);
      return bmu_checksum(*out, cb.n_nodes());
    };
  }

  std::uint64_t run() const { return run_(); }

  /// Wall time of one cycle; the checksum is stored in `checksum`.
  double timed(std::uint64_t& checksum) const {
    const auto t0 = std::chrono::steady_clock::now();
    checksum = run_();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
  }

  BenchResult summarize(std::vector<double> samples, std::uint64_t checksum) const {
    BenchResult r;
    r.backend = backend_;
    r.n = n_;
    r.d = d_;
    r.m = m_;
    r.avg_nnz = avg_nnz_;
    r.reps = static_cast<int>(samples.size());
    r.workers = workers_;
    r.median_seconds = median_of(samples);
    r.min_seconds = *std::min_element(samples.begin(), samples.end());
    const double pairs = static_cast<double>(n_) * static_cast<double>(m_);
    r.ns_per_pair = pairs > 0 ? r.median_seconds * 1e9 / pairs : 0.0;
    r.checksum = checksum;
    r.samples = std::move(samples);
    return r;
  }

private:
  template <class Input>
  static double average_nnz(const Input& x) {
    if (x.n_rows() == 0) return 0.0;
    if constexpr (std::is_same_v<Input, DenseMatrix>) {
      std::size_t nz = 0;
      for (std::size_t i = 0; i < x.n_rows(); ++i) {
        for (float v : x.row(i)) nz += v != 0.0f;
      }
      return static_cast<double>(nz) / static_cast<double>(x.n_rows());
    } else {
      return static_cast<double>(x.nnz()) / static_cast<double>(x.n_rows());
    }
  }

  Backend backend_;
  std::size_t n_, d_, m_;
  double avg_nnz_;
  unsigned workers_;
  std::function<std::uint64_t()> run_;
};

namespace detail {

inline void check_reps(int reps) {
  if (reps < 3) throw ArgumentError("reps must be >= 3, got " + std::to_string(reps));
}

inline void check_checksum(std::uint64_t expected, std::uint64_t got) {
  if (expected != got) throw Error("BMU checksum changed between repetitions");
}

}  // namespace detail

/// One untimed warmup, then `reps` timed cycles. `backend` must match the
/// input representation.
template <class Input>
BenchResult time_bmu_cycle(Backend backend, const Input& x, const Codebook& cb, int reps,
                           unsigned workers = 1) {
  if (backend != backend_of<Input>()) {
    throw ArgumentError("backend '" + std::string(to_string(backend)) + "' cannot run on " +
                        std::string(to_string(backend_of<Input>())) + " input");
  }
  detail::check_reps(reps);
  BmuCycle cycle(x, cb, workers);
  const auto expected = cycle.run();
  std::vector<double> samples;
  for (int r = 0; r < reps; ++r) {
    std::uint64_t sum = 0;
    samples.push_back(cycle.timed(sum));
    detail::check_checksum(expected, sum);
  }
  return cycle.summarize(std::move(samples), expected);
}

inline StorageFormat storage_of(Backend b) {
  switch (b) {
    case Backend::dense: return StorageFormat::dense;
    case Backend::sparse: return StorageFormat::sparse_value;
    case Backend::binary: return StorageFormat::sparse_binary;
  }
  return StorageFormat::dense;
}

struct BenchRow {
  SweepRow cell;
  Backend backend = Backend::binary;
  /// Empty when the cell exceeded the budget and was skipped.
  std::optional<BenchResult> result;
};

struct BenchSweepOptions {
  std::vector<Backend> backends{Backend::sparse, Backend::binary};
  int reps = 5;
  unsigned workers = 1;
  std::uint64_t budget_bytes = kNoBudget;
  std::uint64_t seed = 1;
};

/// Synthetic input for a sweep cell: rows of avg_nnz/2 .. 3*avg_nnz/2 ids.
inline SparseBinaryMatrix bench_input(std::size_t n, std::size_t d, std::size_t avg_nnz,
                                      std::uint64_t seed) {
  SynthOptions opt;
  opt.n = n;
  opt.d = d;
  opt.nnz_low = std::max<std::size_t>(1, avg_nnz / 2);
  opt.nnz_high = std::min(d, avg_nnz + (avg_nnz - opt.nnz_low));
  opt.seed = seed;
  return synth_generate(opt);
}

/// Square grid when M is a perfect square, else M x 1.
inline GridGeometry bench_grid(std::size_t m) {
  std::size_t side = 1;
  while ((side + 1) * (side + 1) <= m) ++side;
  if (side * side == m) return {side, side};
  return {m, 1};
}

/// Times every feasible (cell, backend). Within a cell the backends' timed
/// repetitions are interleaved so slow drift affects them alike. Cells over
/// the budget produce a row without a result.
inline std::vector<BenchRow> bench_sweep(const SweepGrid& grid, const BenchSweepOptions& opt,
                                         std::ostream* progress = nullptr) {
  detail::check_reps(opt.reps);
  if (opt.backends.empty()) throw ArgumentError("no backends selected");
  std::vector<BenchRow> rows;
  for (auto m : grid.m) {
    for (auto d : grid.d) {
      for (auto n : grid.n) {
        for (auto nnz : grid.avg_nnz) {
          std::vector<std::size_t> feasible;
          const std::size_t first = rows.size();
          for (auto b : opt.backends) {
            const auto f = storage_of(b);
            BenchRow row{{f, n, d, m, nnz, estimate(f, n, d, m, nnz, opt.budget_bytes, false)},
                         b,
                         std::nullopt};
            if (row.cell.estimate.fits) feasible.push_back(rows.size());
            rows.push_back(std::move(row));
          }
          if (feasible.empty()) continue;

          const auto sbm = bench_input(n, d, nnz, opt.seed);
          const auto g = bench_grid(m);
          const auto cb = init_codebook(g.side_x, g.side_y, d, opt.seed + 1);
          std::optional<SparseValueMatrix> svm;
          std::optional<DenseMatrix> dense;
          std::vector<std::unique_ptr<BmuCycle>> cycles;
          for (auto idx : feasible) {
            switch (rows[idx].backend) {
              case Backend::binary: cycles.push_back(std::make_unique<BmuCycle>(sbm, cb, opt.workers)); break;
              case Backend::sparse:
                if (!svm) svm = svm_from_sbm(sbm);
                cycles.push_back(std::make_unique<BmuCycle>(*svm, cb, opt.workers));
                break;
              case Backend::dense:
                if (!dense) dense = sbm_to_dense(sbm);
                cycles.push_back(std::make_unique<BmuCycle>(*dense, cb, opt.workers));
                break;
            }
          }
          std::vector<std::uint64_t> expected;
          for (auto& c : cycles) expected.push_back(c->run());
          std::vector<std::vector<double>> samples(cycles.size());
          // Rotate the starting backend each rep so no backend always runs first.
          for (int r = 0; r < opt.reps; ++r) {
            for (std::size_t s = 0; s < cycles.size(); ++s) {
              const std::size_t j = (s + static_cast<std::size_t>(r)) % cycles.size();
              std::uint64_t sum = 0;
              samples[j].push_back(cycles[j]->timed(sum));
              detail::check_checksum(expected[j], sum);
            }
          }
          for (std::size_t j = 0; j < cycles.size(); ++j) {
            rows[feasible[j]].result = cycles[j]->summarize(std::move(samples[j]), expected[j]);
          }
          if (progress) {
            *progress << "cell N=" << n << " D=" << d << " M=" << m << " nnz=" << nnz;
            for (std::size_t j = first; j < rows.size(); ++j) {
              *progress << ' ' << to_string(rows[j].backend) << '=';
              if (rows[j].result) *progress << rows[j].result->median_seconds << 's';
              else *progress << "skipped";
            }
            *progress << '\n';
          }
        }
      }
    }
  }
  return rows;
}

inline constexpr std::string_view kBenchCsvExtra =
    ",backend,reps,workers,median_seconds,min_seconds,ns_per_pair,checksum,status";

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kSweepCsvHeader << kBenchCsvExtra << '\n';
  const auto precision = out.precision(9);
  for (const auto& r : rows) {
    write_sweep_row(out, r.cell);
    out << ',' << to_string(r.backend);
    if (r.result) {
      const auto& b = *r.result;
      out << ',' << b.reps << ',' << b.workers << ',' << b.median_seconds << ',' << b.min_seconds
          << ',' << b.ns_per_pair << ',' << b.checksum << ",ok";
    } else {
      out << ",,,,,,,skipped_over_budget";
    }
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace sombra
