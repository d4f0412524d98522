// sombra: command-line front end for the batch SOM library.
//
//   sombra gen      synthetic binary matrix -> SBM1
//   sombra ingest   PubMed XML (plain or gzip) -> SBM1 + vocabulary + PMID list
//   sombra train    SBM1 (or LibSVM text) -> SOMC codebook + JSON-lines report
//   sombra quality  topographic/quantization error, U-matrix and density CSV
//   sombra estimate memory model sweep -> CSV
//   sombra bench    BMU-cycle timing sweep -> CSV
//   sombra export   SOMC codebook -> CSV
//
// Errors go to stderr as one JSON object per line. Exit status is 2 for
// usage errors and 1 for everything else.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sombra/sombra.hpp"

namespace {

using namespace sombra;

struct UsageError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "usage"; }
};

void print_error(std::string_view kind, std::string_view message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

/// Byte counts with an optional K/M/G/T suffix (binary multiples), e.g. "24G" or "24GiB".
std::uint64_t parse_bytes(std::string s) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr == s.data()) throw UsageError("bad byte count '" + s + "'");
  std::string suffix(ptr, s.size() - static_cast<std::size_t>(ptr - s.data()));
  for (auto& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (!suffix.empty() && suffix.back() == 'B') suffix.pop_back();
  if (suffix.size() > 1 && suffix.back() == 'I') suffix.pop_back();
  int shift = 0;
  if (suffix.empty()) shift = 0;
  else if (suffix == "K") shift = 10;
  else if (suffix == "M") shift = 20;
  else if (suffix == "G") shift = 30;
  else if (suffix == "T") shift = 40;
  else throw UsageError("bad byte suffix in '" + s + "'");
  if (shift && value > (std::numeric_limits<std::uint64_t>::max() >> shift)) {
    throw UsageError("byte count '" + s + "' overflows");
  }
  return value << shift;
}

GridGeometry parse_grid(const std::string& s) {
  const auto x = s.find_first_of("xX");
  std::size_t w = 0, h = 0;
  if (x == std::string::npos) throw UsageError("grid must look like WxH, got '" + s + "'");
  auto a = std::from_chars(s.data(), s.data() + x, w);
  auto b = std::from_chars(s.data() + x + 1, s.data() + s.size(), h);
  if (a.ec != std::errc() || a.ptr != s.data() + x || b.ec != std::errc() ||
      b.ptr != s.data() + s.size()) {
    throw UsageError("grid must look like WxH, got '" + s + "'");
  }
  return {w, h};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    if (next > pos) out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

/// Writes to `path`, or stdout when it is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  auto out = open_out(path);
  fn(out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  p.replace_extension(suffix);
  return p.string();
}

bool is_libsvm_path(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".svm" || ext == ".libsvm";
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::size_t n = 0, d = 0;
  std::size_t nnz_low = 5, nnz_high = 15;
  std::uint64_t seed = 0;
  std::optional<std::size_t> clusters;
  std::size_t overlap = 0;
  std::string out;
};

void add_gen(CLI::App& app, GenArgs& a) {
  auto* c = app.add_subcommand("gen", "Generate a synthetic binary matrix");
  c->add_option("--n", a.n, "Number of articles")->required();
  c->add_option("--d", a.d, "Number of columns")->required();
  c->add_option("--seed", a.seed, "Random seed")->required();
  c->add_option("--nnz-low", a.nnz_low, "Smallest row size")->capture_default_str();
  c->add_option("--nnz-high", a.nnz_high, "Largest row size")->capture_default_str();
  c->add_option("--clusters", a.clusters, "Draw each row from one of k column bands");
  c->add_option("--overlap", a.overlap, "Columns each band extends into its neighbours");
  c->add_option("-o,--output", a.out, "Output SBM1 file")->required();
}

int run_gen(const GenArgs& a) {
  SynthOptions o;
  o.n = a.n;
  o.d = a.d;
  o.nnz_low = a.nnz_low;
  o.nnz_high = a.nnz_high;
  o.seed = a.seed;
  o.clusters = a.clusters;
  o.overlap = a.overlap;
  write_sbm1(synth_generate(o), a.out);
  return 0;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string vocab;
  std::string out;
  std::string vocab_out;
  std::string pmids_out;
};

void add_ingest(CLI::App& app, IngestArgs& a) {
  auto* c = app.add_subcommand("ingest", "Build a binary matrix from PubMed XML (plain or gzip)");
  c->add_option("inputs", a.inputs, "XML files")->required();
  c->add_option("--vocab", a.vocab, "Fixed vocabulary; unknown descriptors are dropped");
  c->add_option("-o,--output", a.out, "Output SBM1 file")->required();
  c->add_option("--vocab-out", a.vocab_out, "Vocabulary output (default: <output>.vocab.txt)");
  c->add_option("--pmids-out", a.pmids_out, "PMID list output (default: <output>.pmids.txt)");
}

int run_ingest(const IngestArgs& a) {
  std::optional<Vocabulary> fixed;
  if (!a.vocab.empty()) fixed = load_vocab(a.vocab);
  MedlineCollector collector(std::move(fixed));
  for (const auto& path : a.inputs) collector.add_file(path);
  const auto corpus = collector.finish();
  write_sbm1(corpus.matrix, a.out);
  save_vocab(corpus.vocab, a.vocab_out.empty() ? sibling_path(a.out, ".vocab.txt") : a.vocab_out);
  emit(a.pmids_out.empty() ? sibling_path(a.out, ".pmids.txt") : a.pmids_out, [&](std::ostream& o) {
    for (const auto& p : corpus.pmids) o << p << '\n';
  });
  const auto& s = corpus.stats;
  std::cout << nlohmann::json{{"articles", corpus.matrix.n_rows()},
                              {"columns", corpus.matrix.n_cols()},
                              {"nnz", corpus.matrix.nnz()},
                              {"articles_seen", s.articles_seen},
                              {"skipped_no_pmid", s.skipped_no_pmid},
                              {"duplicate_pmids", s.duplicate_pmids},
                              {"headings", s.headings},
                              {"dropped_unknown", s.dropped_unknown},
                              {"descriptors_without_ui", s.descriptors_without_ui}}
                   .dump()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string input;
  std::string backend = "binary";
  std::string grid;
  std::optional<int> epochs;
  std::uint64_t seed = 0;
  std::string distance_mode = "euclidean_full";
  std::string adjacency = "manhattan1";
  bool deterministic = false;
  std::optional<std::size_t> d;
  std::optional<double> sigma0;
  double decay = 1.7;
  std::optional<double> cutoff;
  std::string init;
  unsigned workers = 0;
  std::string out;
  std::string report;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Train a codebook");
  c->add_option("-i,--input", a.input, "SBM1 matrix, or LibSVM text (.svm/.libsvm, needs --d)")
      ->required();
  c->add_option("--backend", a.backend, "dense | sparse | binary")
      ->check(CLI::IsMember({"dense", "sparse", "value", "binary"}))
      ->capture_default_str();
  c->add_option("--grid", a.grid, "Grid size WxH")->required();
  c->add_option("--epochs", a.epochs, "Number of epochs (default from sigma0 and decay)");
  c->add_option("--seed", a.seed, "Codebook initialisation seed")->capture_default_str();
  c->add_option("--distance-mode", a.distance_mode, "euclidean_full | normalized_reduced")
      ->check(CLI::IsMember({"euclidean_full", "normalized_reduced"}))
      ->capture_default_str();
  c->add_option("--adjacency", a.adjacency, "Adjacency for the reported topographic error")
      ->check(CLI::IsMember({"manhattan1", "chebyshev1"}))
      ->capture_default_str();
  c->add_flag("--deterministic", a.deterministic, "Reproducible reduction order");
  c->add_option("--d", a.d, "Expected input dimension");
  c->add_option("--sigma0", a.sigma0, "Initial radius (default min(W,H)/2)");
  c->add_option("--decay", a.decay, "Radius decay base")->capture_default_str();
  c->add_option("--cutoff", a.cutoff, "Zero the neighbourhood beyond cutoff*sigma");
  c->add_option("--init", a.init, "Start from this SOMC codebook instead of a random one");
  c->add_option("--workers", a.workers, "Worker threads (default $SOMBRA_WORKERS or all cores)");
  c->add_option("-o,--output", a.out, "Output SOMC codebook")->required();
  c->add_option("--report", a.report, "Per-epoch JSON-lines report");
}

template <class Input>
TrainResult run_training(const Input& x, const TrainConfig& cfg, const std::string& init) {
  if (!init.empty()) return train(x, cfg, read_somc(init));
  return train(x, cfg);
}

int run_train(const TrainArgs& a) {
  const auto grid = parse_grid(a.grid);
  TrainConfig cfg;
  cfg.side_x = grid.side_x;
  cfg.side_y = grid.side_y;
  cfg.dim = a.d;
  cfg.epochs = a.epochs;
  cfg.decay = a.decay;
  cfg.sigma0 = a.sigma0;
  cfg.distance_mode = parse_distance_mode(a.distance_mode);
  cfg.adjacency_mode = parse_adjacency_mode(a.adjacency);
  cfg.cutoff = a.cutoff;
  cfg.seed = a.seed;
  cfg.deterministic_reduction = a.deterministic;
  cfg.workers = a.workers ? a.workers : default_workers();
  cfg.validate();
  const auto backend = parse_backend(a.backend);

  TrainResult result;
  if (is_libsvm_path(a.input)) {
    if (!a.d) throw UsageError("LibSVM input needs --d");
    if (backend == Backend::binary) throw ArgumentError("binary backend needs SBM1 input");
    std::ifstream in(a.input);
    if (!in) throw IoError("cannot open '" + a.input + "'");
    auto data = read_libsvm_text(in, *a.d);
    result = backend == Backend::sparse ? run_training(data.matrix, cfg, a.init)
                                        : run_training(svm_to_dense(data.matrix), cfg, a.init);
  } else {
    if (a.d) {
      std::ifstream in(a.input, std::ios::binary);
      if (!in) throw IoError("cannot open '" + a.input + "'");
      const auto h = read_sbm1_header(in);
      if (h.n_cols != *a.d) {
        throw ArgumentError("--d " + std::to_string(*a.d) + " does not match D=" +
                            std::to_string(h.n_cols) + " in '" + a.input + "'");
      }
    }
    const auto x = read_sbm1(a.input);
    switch (backend) {
      case Backend::binary: result = run_training(x, cfg, a.init); break;
      case Backend::sparse: result = run_training(svm_from_sbm(x), cfg, a.init); break;
      case Backend::dense: result = run_training(sbm_to_dense(x), cfg, a.init); break;
    }
  }
  write_somc(result.codebook, a.out);
  if (!a.report.empty()) {
    emit(a.report, [&](std::ostream& o) { write_report_jsonl(o, result.reports); });
  }
  return 0;
}

// ---------------------------------------------------------------- quality

struct QualityArgs {
  std::string input;
  std::string codebook;
  std::string adjacency = "manhattan1";
  std::string umatrix;
  std::string density;
  std::string out;
  unsigned workers = 0;
};

void add_quality(CLI::App& app, QualityArgs& a) {
  auto* c = app.add_subcommand("quality", "Score a codebook against a matrix");
  c->add_option("-i,--input", a.input, "SBM1 matrix")->required();
  c->add_option("-c,--codebook", a.codebook, "SOMC codebook")->required();
  c->add_option("--adjacency", a.adjacency, "manhattan1 | chebyshev1")
      ->check(CLI::IsMember({"manhattan1", "chebyshev1"}))
      ->capture_default_str();
  c->add_option("--umatrix", a.umatrix, "Write the U-matrix grid as CSV");
  c->add_option("--density", a.density, "Write BMU counts per node as CSV");
  c->add_option("-o,--output", a.out, "Report JSON (default stdout)");
  c->add_option("--workers", a.workers, "Worker threads");
}

int run_quality(const QualityArgs& a) {
  const auto x = read_sbm1(a.input);
  const auto cb = read_somc(a.codebook);
  BmuPair bmus;
  const auto report = evaluate_quality(x, cb, parse_adjacency_mode(a.adjacency),
                                       a.workers ? a.workers : default_workers(), &bmus);
  emit(a.out, [&](std::ostream& o) { o << to_json(report).dump() << '\n'; });
  if (!a.umatrix.empty()) {
    const auto u = umatrix(cb);
    emit(a.umatrix, [&](std::ostream& o) { write_grid_csv(o, cb.grid(), u.data()); });
  }
  if (!a.density.empty()) {
    const auto counts = bmu_density(bmus.bmu1, cb.grid());
    emit(a.density, [&](std::ostream& o) {
      write_grid_csv<std::uint64_t>(o, cb.grid(), counts);
    });
  }
  return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string budget;
  std::string sweep;
  std::string formats = "dense,sparse_value,sparse_binary";
  bool storage_only = false;
  std::string out;
};

void add_estimate(CLI::App& app, EstimateArgs& a) {
  auto* c = app.add_subcommand("estimate", "Memory model sweep as CSV");
  c->add_option("--budget", a.budget, "Memory budget in bytes (suffixes K, M, G, T)")->required();
  c->add_option("--sweep", a.sweep, "Axes N=..;D=..;M=..;nnz=.. (values, a,b lists or lo:hi:step ranges)")
      ->required();
  c->add_option("--formats", a.formats, "Comma list of dense, sparse_value, sparse_binary")
      ->capture_default_str();
  c->add_flag("--storage-only", a.storage_only, "Count articles and codebook only");
  c->add_option("-o,--output", a.out, "CSV output (default stdout)");
}

int run_estimate(const EstimateArgs& a) {
  std::vector<StorageFormat> formats;
  for (const auto& f : split_list(a.formats)) formats.push_back(parse_storage_format(f));
  const auto rows = sweep(parse_bytes(a.budget), parse_sweep_grid(a.sweep), formats, a.storage_only);
  emit(a.out, [&](std::ostream& o) { write_sweep_csv(o, rows); });
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string sweep;
  std::string backends = "sparse,binary";
  int reps = 5;
  unsigned workers = 0;
  std::string budget;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;
};

void add_bench(CLI::App& app, BenchArgs& a) {
  auto* c = app.add_subcommand("bench", "Time the BMU cycle over a sweep");
  c->add_option("--sweep", a.sweep, "Axes: N=..;D=..;M=..;nnz=..")->required();
  c->add_option("--backends", a.backends, "Comma list of dense, sparse, binary")
      ->capture_default_str();
  c->add_option("--reps", a.reps, "Timed repetitions per cell (>= 3)")->capture_default_str();
  c->add_option("--workers", a.workers, "Worker threads");
  c->add_option("--budget", a.budget, "Skip cells whose modelled footprint exceeds this");
  c->add_option("--seed", a.seed, "Seed for inputs and codebooks")->capture_default_str();
  c->add_option("-o,--output", a.out, "CSV output (default stdout)");
  c->add_flag("-q,--quiet", a.quiet, "No progress lines on stderr");
}

int run_bench(const BenchArgs& a) {
  BenchSweepOptions opt;
  opt.backends.clear();
  for (const auto& b : split_list(a.backends)) opt.backends.push_back(parse_backend(b));
  opt.reps = a.reps;
  opt.workers = a.workers ? a.workers : default_workers();
  opt.budget_bytes = a.budget.empty() ? kNoBudget : parse_bytes(a.budget);
  opt.seed = a.seed;
  const auto rows = bench_sweep(parse_sweep_grid(a.sweep), opt, a.quiet ? nullptr : &std::cerr);
  emit(a.out, [&](std::ostream& o) { write_bench_csv(o, rows); });
  return 0;
}

// ---------------------------------------------------------------- export

struct ExportArgs {
  std::string codebook;
  std::string format = "csv";
  std::string out;
};

void add_export(CLI::App& app, ExportArgs& a) {
  auto* c = app.add_subcommand("export", "Write a codebook as CSV");
  c->add_option("-c,--codebook", a.codebook, "SOMC codebook")->required();
  c->add_option("--format", a.format, "csv")->check(CLI::IsMember({"csv"}))->capture_default_str();
  c->add_option("-o,--output", a.out, "Output (default stdout)");
}

int run_export(const ExportArgs& a) {
  const auto cb = read_somc(a.codebook);
  emit(a.out, [&](std::ostream& o) {
    o << "node,x,y";
    for (std::size_t j = 0; j < cb.dim(); ++j) o << ",w" << j;
    o << '\n';
    o.precision(9);
    for (std::size_t k = 0; k < cb.n_nodes(); ++k) {
      const auto p = cb.grid().position(k);
      o << k << ',' << p.x << ',' << p.y;
      for (float w : cb.node(k)) o << ',' << w;
      o << '\n';
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch self-organizing maps over sparse binary data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sombra 0.1.0");

  GenArgs gen;
  IngestArgs ingest;
  TrainArgs train_args;
  QualityArgs quality;
  EstimateArgs estimate_args;
  BenchArgs bench;
  ExportArgs export_args;
  add_gen(app, gen);
  add_ingest(app, ingest);
  add_train(app, train_args);
  add_quality(app, quality);
  add_estimate(app, estimate_args);
  add_bench(app, bench);
  add_export(app, export_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "gen") return run_gen(gen);
    if (name == "ingest") return run_ingest(ingest);
    if (name == "train") return run_train(train_args);
    if (name == "quality") return run_quality(quality);
    if (name == "estimate") return run_estimate(estimate_args);
    if (name == "bench") return run_bench(bench);
    if (name == "export") return run_export(export_args);
  } catch (const UsageError& e) {
    print_error(e.kind(), e.what());
    return 2;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 2;
}
