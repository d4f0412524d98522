#pragma once

// Byte-exact storage model for the three training formats.
//
//   dense:          articles = N*D*4
//   sparse value:   articles = nnz*(4+4) + (N+1)*8
//   sparse binary:  articles = nnz*4     + (N+1)*8
//   all:            codebook = M*D*4
//                   scratch  = N*(4+4+2*4) + M*D*8 + M*8
//                              (dst, chi, bmu pair; double numerators; denominators)

#include <cctype>
#include <charconv>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sombra/error.hpp"

namespace sombra {

enum class StorageFormat { dense, sparse_value, sparse_binary };

inline std::string_view to_string(StorageFormat f) {
  switch (f) {
    case StorageFormat::dense: return "dense";
    case StorageFormat::sparse_value: return "sparse_value";
    case StorageFormat::sparse_binary: return "sparse_binary";
  }
  return "?";
}

inline StorageFormat parse_storage_format(std::string_view s) {
  if (s == "dense") return StorageFormat::dense;
  if (s == "sparse_value" || s == "sparse" || s == "value" || s == "libsvm") {
    return StorageFormat::sparse_value;
  }
  if (s == "sparse_binary" || s == "binary" || s == "medsom") return StorageFormat::sparse_binary;
  throw ArgumentError("unknown storage format '" + std::string(s) + "'");
}

inline constexpr std::uint64_t kMiB = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kGiB = std::uint64_t{1} << 30;

namespace detail {

inline std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    throw CapacityError("memory estimate overflows 64 bits");
  }
  return a + b;
}

}  // namespace detail

struct MemoryEstimate {
  std::uint64_t articles_bytes = 0;
  std::uint64_t codebook_bytes = 0;
  std::uint64_t scratch_bytes = 0;
  std::uint64_t total_bytes = 0;
  bool fits = true;

  /// Recomputes total and the budget flag.
  void finish(std::uint64_t budget_bytes) {
    total_bytes = detail::add(detail::add(articles_bytes, codebook_bytes), scratch_bytes);
    fits = total_bytes <= budget_bytes;
  }
};

namespace detail {

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw CapacityError("memory estimate overflows 64 bits");
  }
  return a * b;
}

inline std::uint64_t codebook_bytes(std::uint64_t m, std::uint64_t d) { return mul(mul(m, d), 4); }

inline std::uint64_t scratch_bytes(std::uint64_t n, std::uint64_t d, std::uint64_t m) {
  return add(add(mul(n, 4 + 4 + 2 * 4), mul(mul(m, d), 8)), mul(m, 8));
}

inline std::uint64_t offsets_bytes(std::uint64_t n) { return mul(add(n, 1), 8); }

}  // namespace detail

/// Budget used when none is given: unlimited.
inline constexpr std::uint64_t kNoBudget = std::numeric_limits<std::uint64_t>::max();

inline MemoryEstimate estimate_dense(std::uint64_t n, std::uint64_t d, std::uint64_t m,
                                     std::uint64_t budget = kNoBudget, bool storage_only = false) {
  MemoryEstimate e;
  e.articles_bytes = detail::mul(detail::mul(n, d), 4);
  e.codebook_bytes = detail::codebook_bytes(m, d);
  e.scratch_bytes = storage_only ? 0 : detail::scratch_bytes(n, d, m);
  e.finish(budget);
  return e;
}

/// Index+value CSR. `d` and `m` size the codebook and scratch terms only.
inline MemoryEstimate estimate_sparse_value(std::uint64_t n, std::uint64_t nnz_total,
                                            std::uint64_t d = 0, std::uint64_t m = 0,
                                            std::uint64_t budget = kNoBudget,
                                            bool storage_only = false) {
  MemoryEstimate e;
  e.articles_bytes = detail::add(detail::mul(nnz_total, 8), detail::offsets_bytes(n));
  e.codebook_bytes = detail::codebook_bytes(m, d);
  e.scratch_bytes = storage_only ? 0 : detail::scratch_bytes(n, d, m);
  e.finish(budget);
  return e;
}

/// Index-only CSR.
inline MemoryEstimate estimate_sparse_binary(std::uint64_t n, std::uint64_t nnz_total,
                                             std::uint64_t d = 0, std::uint64_t m = 0,
                                             std::uint64_t budget = kNoBudget,
                                             bool storage_only = false) {
  MemoryEstimate e;
  e.articles_bytes = detail::add(detail::mul(nnz_total, 4), detail::offsets_bytes(n));
  e.codebook_bytes = detail::codebook_bytes(m, d);
  e.scratch_bytes = storage_only ? 0 : detail::scratch_bytes(n, d, m);
  e.finish(budget);
  return e;
}

inline MemoryEstimate estimate(StorageFormat format, std::uint64_t n, std::uint64_t d,
                               std::uint64_t m, std::uint64_t avg_nnz, std::uint64_t budget,
                               bool storage_only) {
  switch (format) {
    case StorageFormat::dense: return estimate_dense(n, d, m, budget, storage_only);
    case StorageFormat::sparse_value:
      return estimate_sparse_value(n, detail::mul(n, avg_nnz), d, m, budget, storage_only);
    case StorageFormat::sparse_binary:
      return estimate_sparse_binary(n, detail::mul(n, avg_nnz), d, m, budget, storage_only);
  }
  throw ArgumentError("unknown storage format");
}

/// Axes of a sweep; every combination becomes one row.
struct SweepGrid {
  std::vector<std::uint64_t> n;
  std::vector<std::uint64_t> d;
  std::vector<std::uint64_t> m;
  std::vector<std::uint64_t> avg_nnz{10};
};

struct SweepRow {
  StorageFormat format = StorageFormat::dense;
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::uint64_t m = 0;
  std::uint64_t avg_nnz = 0;
  MemoryEstimate estimate;
};

inline std::vector<SweepRow> sweep(std::uint64_t budget, const SweepGrid& grid,
                                   const std::vector<StorageFormat>& formats,
                                   bool storage_only = false) {
  if (grid.n.empty() || grid.d.empty() || grid.m.empty() || grid.avg_nnz.empty() ||
      formats.empty()) {
    throw ArgumentError("sweep ranges must be non-empty");
  }
  std::vector<SweepRow> rows;
  for (auto f : formats) {
    for (auto m : grid.m) {
      for (auto d : grid.d) {
        for (auto n : grid.n) {
          for (auto nnz : grid.avg_nnz) {
            rows.push_back({f, n, d, m, nnz, estimate(f, n, d, m, nnz, budget, storage_only)});
          }
        }
      }
    }
  }
  return rows;
}

inline constexpr std::string_view kSweepCsvHeader =
    "algorithm,N,D,M,avg_nnz,articles_bytes,codebook_bytes,scratch_bytes,total_bytes,fits";

inline void write_sweep_row(std::ostream& out, const SweepRow& r) {
  out << to_string(r.format) << ',' << r.n << ',' << r.d << ',' << r.m << ',' << r.avg_nnz << ','
      << r.estimate.articles_bytes << ',' << r.estimate.codebook_bytes << ','
      << r.estimate.scratch_bytes << ',' << r.estimate.total_bytes << ','
      << (r.estimate.fits ? "true" : "false");
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    write_sweep_row(out, r);
    out << '\n';
  }
}

namespace detail {

inline std::uint64_t parse_count(std::string_view s, std::string_view key) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ArgumentError("sweep: bad value '" + std::string(s) + "' for " + std::string(key));
  }
  return v;
}

}  // namespace detail

/// Parses "N=a,b,...;D=start:stop:step;M=...;nnz=..." into a SweepGrid. Each
/// axis takes a comma list whose items are values or inclusive ranges
/// start:stop[:step]. Keys are case-insensitive; nnz (alias avg_nnz)
/// defaults to 10.
inline SweepGrid parse_sweep_grid(std::string_view text) {
  SweepGrid g;
  g.avg_nnz.clear();
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      auto next = s.find(sep, pos);
      if (next == std::string_view::npos) next = s.size();
      if (next > pos) parts.push_back(s.substr(pos, next - pos));
      pos = next + 1;
    }
    return parts;
  };
  for (auto clause : split(text, ';')) {
    const auto eq = clause.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("sweep: expected key=values, got '" + std::string(clause) + "'");
    }
    std::string key(clause.substr(0, eq));
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::vector<std::uint64_t>* axis = nullptr;
    if (key == "n") axis = &g.n;
    else if (key == "d") axis = &g.d;
    else if (key == "m") axis = &g.m;
    else if (key == "nnz" || key == "avg_nnz") axis = &g.avg_nnz;
    else throw ArgumentError("sweep: unknown axis '" + key + "'");
    for (auto item : split(clause.substr(eq + 1), ',')) {
      auto bounds = split(item, ':');
      if (bounds.size() == 1) {
        axis->push_back(detail::parse_count(bounds[0], key));
      } else if (bounds.size() == 2 || bounds.size() == 3) {
        const auto lo = detail::parse_count(bounds[0], key);
        const auto hi = detail::parse_count(bounds[1], key);
        const auto step = bounds.size() == 3 ? detail::parse_count(bounds[2], key) : 1;
        if (step == 0 || hi < lo) throw ArgumentError("sweep: bad range for " + key);
        for (auto v = lo; v <= hi; v += step) axis->push_back(v);
      } else {
        throw ArgumentError("sweep: bad range '" + std::string(item) + "'");
      }
    }
  }
  if (g.avg_nnz.empty()) g.avg_nnz.push_back(10);
  if (g.n.empty() || g.d.empty() || g.m.empty()) {
    throw ArgumentError("sweep: N, D and M axes are required");
  }
  return g;
}

}  // namespace sombra
