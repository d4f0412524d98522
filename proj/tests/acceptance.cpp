// Acceptance runs. Each criterion prints one PASS/FAIL line; the exit status
// is nonzero when any selected criterion fails.
//
//   sombra_acceptance [--criterion N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sombra/sombra.hpp"

using namespace sombra;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SparseBinaryMatrix random_rows(std::size_t n, std::size_t d, std::size_t lo, std::size_t hi,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(lo, hi);
  std::uniform_int_distribution<ColumnId> col(0, static_cast<ColumnId>(d - 1));
  std::vector<std::vector<ColumnId>> rows(n);
  for (auto& r : rows) {
    std::set<ColumnId> s;
    const std::size_t k = std::min(len(rng), d);
    while (s.size() < k) s.insert(col(rng));
    r.assign(s.begin(), s.end());
  }
  return sbm_from_rows(rows, d);
}

// 1. Identical BMU pairs every epoch and matching codebooks across backends.
void cross_backend(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_rel = 0.0;
  std::size_t bad_epochs = 0;
  for (std::uint64_t inst = 1; inst <= 10; ++inst) {
    const auto xb = synth_generate({.n = 2000, .d = 200, .seed = 1000 + inst});
    const auto xs = svm_from_sbm(xb);
    const auto xd = sbm_to_dense(xb);
    TrainConfig cfg;
    cfg.side_x = 20;
    cfg.side_y = 20;
    cfg.epochs = 5;
    cfg.seed = inst;
    cfg.deterministic_reduction = true;
    cfg.workers = default_workers();

    std::vector<std::vector<NodeIndex>> b1[3], b2[3];
    auto observer = [&](int which) {
      return [&, which](const EpochReport&, const BmuPair& p) {
        b1[which].push_back(p.bmu1);
        b2[which].push_back(p.bmu2);
      };
    };
    const auto rd = train(xd, cfg, observer(0));
    const auto rs = train(xs, cfg, observer(1));
    const auto rb = train(xb, cfg, observer(2));
    for (int e = 0; e < 5; ++e) {
      const bool same = b1[0][e] == b1[2][e] && b1[1][e] == b1[2][e] && b2[0][e] == b2[2][e] &&
                        b2[1][e] == b2[2][e];
      bad_epochs += !same;
    }
    const auto wb = rb.codebook.weights();
    for (const auto* other : {&rd.codebook, &rs.codebook}) {
      const auto w = other->weights();
      for (std::size_t j = 0; j < wb.size(); ++j) {
        const double a = wb[j];
        const double b = w[j];
        const double scale = std::max(std::abs(a), std::abs(b));
        if (a != b) worst_rel = std::max(worst_rel, scale > 0 ? std::abs(a - b) / scale : 0.0);
      }
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(bad_epochs == 0, std::to_string(bad_epochs) + " epochs with differing BMU pairs");
  o.require(worst_rel <= 1e-4, "relative weight gap");
  o.require(elapsed < 120.0, "runtime");
  o.detail << "instances=10 epochs=5 mismatched_epochs=" << bad_epochs
           << " max_rel_weight_gap=" << worst_rel << " seconds=" << elapsed;
}

// 2. Memory model figures.
void memory_model(Outcome& o) {
  const std::uint64_t n = 30'000'000;
  const std::uint64_t nnz = 300'000'000;
  const auto bin = estimate_sparse_binary(n, nnz);
  const auto val = estimate_sparse_value(n, nnz);
  const double mib = static_cast<double>(bin.articles_bytes) / static_cast<double>(kMiB);
  const double rel = std::abs(mib - 1378.0) / 1378.0;
  o.require(std::llround(mib) == 1373, "binary articles rounds to 1373 MiB");
  o.require(rel <= 0.01, "within 1% of 1378 MiB");

  const std::uint64_t offsets = (n + 1) * 8;
  o.require((val.articles_bytes - offsets) == 2 * (bin.articles_bytes - offsets),
            "value payload is twice the binary payload");

  const std::uint64_t budget = 24 * kGiB;
  const std::uint64_t m = 350 * 350;
  const auto a = estimate_dense(1'000'000, 5'000, m, budget, true);
  const auto b = estimate_dense(70'000, 30'000, m, budget, true);
  o.require(a.fits, "1e6 x 5000 dense fits 24 GiB");
  o.require(b.fits, "7e4 x 30000 dense fits 24 GiB");
  o.detail << std::fixed << std::setprecision(1) << "binary_articles_MiB=" << mib
           << " rel_to_1378=" << std::setprecision(4) << rel << " value_articles_MiB="
           << std::setprecision(1) << static_cast<double>(val.articles_bytes) / kMiB
           << " dense_corners_MiB=" << static_cast<double>(a.total_bytes) / kMiB << ","
           << static_cast<double>(b.total_bytes) / kMiB;
}

// 3. Binary BMU cycle against dense at a large D/nnz ratio.
void speedup(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto xb = bench_input(20'000, 5'000, 10, 7);
  const auto cb = init_codebook(50, 50, 5'000, 8);
  const auto rb = time_bmu_cycle(Backend::binary, xb, cb, 5);
  const auto xd = sbm_to_dense(xb);
  const auto rd = time_bmu_cycle(Backend::dense, xd, cb, 5);
  const double ratio = rd.median_seconds / rb.median_seconds;
  const double elapsed = seconds_since(t0);
  o.require(rb.checksum == rd.checksum, "same BMUs");
  o.require(ratio >= 50.0, "speedup >= 50");
  o.require(elapsed < 900.0, "runtime");
  o.detail << "dense_median_s=" << rd.median_seconds << " binary_median_s=" << rb.median_seconds
           << " speedup=" << ratio << " seconds=" << elapsed;
}

// 4. Binary never slower than value over the bench sweep.
void binary_vs_value(Outcome& o) {
  SweepGrid grid{{10'000, 100'000}, {1'000, 5'000}, {2'500, 10'000}, {10}};
  BenchSweepOptions opt;
  opt.backends = {Backend::sparse, Backend::binary};
  opt.reps = 5;
  opt.workers = 1;
  const auto rows = bench_sweep(grid, opt, &std::cerr);
  std::size_t cells = 0;
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const auto& v = rows[i];
    const auto& b = rows[i + 1];
    if (!v.result || !b.result || v.backend != Backend::sparse || b.backend != Backend::binary) {
      o.require(false, "missing bench result");
      continue;
    }
    ++cells;
    const double r = b.result->median_seconds / v.result->median_seconds;
    worst = std::max(worst, r);
    ok += b.result->median_seconds <= v.result->median_seconds;
    std::cerr << "  N=" << v.cell.n << " D=" << v.cell.d << " M=" << v.cell.m
              << " value_s=" << v.result->median_seconds << " binary_s=" << b.result->median_seconds
              << " binary/value=" << r << '\n';
  }
  o.require(cells == 8, "8 cells");
  o.require(ok == cells, "binary <= value in every cell");
  o.detail << "cells=" << cells << " binary_not_slower=" << ok << " worst_binary_over_value=" << worst;
}

// 5. Training lowers quantization and topographic error on clustered data.
void training_sanity(Outcome& o) {
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = synth_generate({.n = 5000, .d = 200, .seed = seed, .clusters = 4});
    TrainConfig cfg;
    cfg.side_x = 15;
    cfg.side_y = 15;
    cfg.epochs = 8;
    cfg.seed = seed;
    cfg.workers = default_workers();
    const auto initial = init_codebook(15, 15, 200, seed);
    const auto before = evaluate_quality(x, initial, AdjacencyMode::manhattan1, cfg.workers);
    const auto result = train(x, cfg, initial);
    const auto after = evaluate_quality(x, result.codebook, AdjacencyMode::manhattan1, cfg.workers);
    const bool ok = after.quantization_error < before.quantization_error &&
                    after.topographic_error < before.topographic_error;
    passed += ok;
    o.detail << "seed" << seed << "(qe " << before.quantization_error << "->"
             << after.quantization_error << ", te " << before.topographic_error << "->"
             << after.topographic_error << ") ";
  }
  o.require(passed >= 4, "at least 4 of 5 seeds");
  o.detail << "passed=" << passed << "/5";
}

// 6. Property checks over random instances.
void properties(Outcome& o) {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (std::size_t d : {10u, 500u, 10'000u}) {
    const auto xb = random_rows(40, d, 0, std::min<std::size_t>(d, 30), d);
    const auto xs = svm_from_sbm(xb);
    const auto cb = init_codebook(3, 3, d, d + 1);
    const auto norms = node_squared_norms(cb);
    const auto chi = chi_init(xb);
    for (std::size_t i = 0; i < xb.n_rows(); ++i) {
      std::vector<double> dense(d, 0.0);
      for (auto j : xb.row(i)) dense[j] = 1.0;
      for (std::size_t k = 0; k < cb.n_nodes(); ++k) {
        double brute = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double t = dense[j] - cb.node(k)[j];
          brute += t * t;
        }
        const double b = distance_binary(xb.row(i), cb.node(k), chi[i], norms[k],
                                         DistanceMode::euclidean_full);
        const double s = distance_sparse(xs.row(i), xs.row_values(i), cb.node(k), chi[i], norms[k]);
        worst = std::max({worst, std::abs(b - brute), std::abs(s - brute)});
      }
    }
  }
  o.require(worst <= 1e-9, "distance identity");

  const auto x = random_rows(300, 60, 0, 12, 5);
  const auto cb = init_codebook(6, 5, 60, 6);
  const auto pc = prepare_codebook(cb, Backend::binary, DistanceMode::euclidean_full);
  auto chi = chi_init(x);
  BmuPair base;
  BmuPair shifted;
  search_bmus(x, cb, pc, chi, 1, base);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (auto& c : chi) c += shift(rng);
  search_bmus(x, cb, pc, chi, 1, shifted);
  o.require(base.bmu1 == shifted.bmu1 && base.bmu2 == shifted.bmu2, "shift invariance");
  const auto dense_pair = find_bmu_pair(sbm_to_dense(x), cb);
  o.require(dense_pair.bmu1 == base.bmu1 && dense_pair.bmu2 == base.bmu2, "dense BMU agreement");

  bool h_ok = true;
  std::uniform_int_distribution<int> pos(0, 30);
  std::uniform_real_distribution<double> sig(0.05, 40.0);
  for (int t = 0; t < 10'000; ++t) {
    const GridPos a{pos(rng), pos(rng)};
    const GridPos b{pos(rng), pos(rng)};
    const double s = sig(rng);
    const double h = neighborhood_h(a, b, s);
    h_ok = h_ok && h >= 0.0 && h <= 1.0 && h == neighborhood_h(b, a, s) &&
           neighborhood_h(a, a, s) == 1.0;
  }
  o.require(h_ok, "h bounds and symmetry");

  TrainConfig cfg;
  cfg.side_x = 6;
  cfg.side_y = 5;
  cfg.epochs = 6;
  cfg.seed = 3;
  cfg.deterministic_reduction = true;
  const auto trained = train(x, cfg);
  const auto w = trained.codebook.weights();
  o.require(std::all_of(w.begin(), w.end(), [](float v) { return v >= 0.0f && v <= 1.0f; }),
            "weights stay in [0,1]");

  o.require(sbm_from_rows(nonzero_rows(sbm_to_dense(x)), x.n_cols()) == x, "CSR round trip");
  std::stringstream buf;
  write_sbm1(x, buf);
  o.require(read_sbm1(buf) == x, "SBM1 round trip");

  bool det_ok = true;
  for (unsigned workers : {2u, 3u, 7u}) {
    auto c = cfg;
    c.workers = workers;
    det_ok = det_ok && train(x, c).codebook == trained.codebook;
  }
  o.require(det_ok, "worker-count determinism");
  o.detail << "max_distance_gap=" << worst;
}

// 7. Ingestion fixture.
void ingestion(Outcome& o) {
  std::ifstream in(std::string(SOMBRA_TEST_DATA) + "/medline_3.xml", std::ios::binary);
  const auto c = parse_medline_xml(in);
  const SparseBinaryMatrix want(3, 5, {0, 2, 2, 6}, {0, 4, 0, 1, 2, 3});
  o.require(c.matrix == want, "fixture matrix");
  o.require(c.vocab.ids() == std::vector<std::string>{"D000001", "D005260", "D006801", "D009369",
                                                      "D012345"},
            "fixture vocabulary");
  o.require(c.matrix.n_rows() == 3 && c.matrix.row_nnz(1) == 0, "empty row for article 200");
  std::stringstream buf;
  save_vocab(c.vocab, buf);
  o.require(load_vocab(buf) == c.vocab, "vocabulary round trip");
  o.detail << "rows=" << c.matrix.n_rows() << " nnz=" << c.matrix.nnz()
           << " vocab=" << c.vocab.size();
}

const std::vector<std::function<void(Outcome&)>> kCriteria = {
    cross_backend, memory_model, speedup, binary_vs_value, training_sanity, properties, ingestion};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: sombra_acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (int n = 1; n <= static_cast<int>(kCriteria.size()); ++n) selected.push_back(n);
  }
  int failures = 0;
  for (int n : selected) {
    if (n < 1 || n > static_cast<int>(kCriteria.size())) {
      std::cerr << "no criterion " << n << '\n';
      return 2;
    }
    Outcome o;
    try {
      kCriteria[static_cast<std::size_t>(n - 1)](o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str()
              << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
