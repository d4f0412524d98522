#pragma once

// On-disk formats.
//
// SBM1 (little-endian): "SBM1", u32 version = 1, u64 N, u32 D, u64 nnz,
//   (N+1) x u64 row offsets, nnz x u32 column ids.
// SOMC (little-endian): "SOMC", u32 version = 1, u32 side_x, u32 side_y,
//   u32 D, then M*D IEEE-754 single-precision weights, node-major.
// LibSVM text: one row per line, "label idx:val idx:val ...".

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sombra/codebook.hpp"
#include "sombra/error.hpp"
#include "sombra/matrix.hpp"

namespace sombra {

inline constexpr std::uint32_t kSbm1Version = 1;
inline constexpr std::uint32_t kSomcVersion = 1;

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_array(std::ostream& out, std::span<const T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (T v : values) put(out, v);
  }
}

inline void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ParseError(ParseError::Reason::truncated, std::string("truncated stream reading ") + what);
  }
}

template <class T>
T get(std::istream& in, const char* what) {
  T v;
  read_exact(in, &v, sizeof(T), what);
  return to_little(v);
}

template <class T>
std::vector<T> get_array(std::istream& in, std::uint64_t count, const char* what) {
  // Grow in chunks so a lying header cannot trigger a huge up-front allocation.
  constexpr std::uint64_t kChunk = std::uint64_t{1} << 20;
  std::vector<T> out;
  while (out.size() < count) {
    const auto take = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - out.size()));
    const auto old = out.size();
    out.resize(old + take);
    read_exact(in, out.data() + old, take * sizeof(T), what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : out) v = to_little(v);
  }
  return out;
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4) {
    throw ParseError(ParseError::Reason::truncated, "truncated stream reading magic");
  }
  if (std::string_view(buf, 4) != magic) {
    throw ParseError(ParseError::Reason::bad_magic,
                     "bad magic: expected '" + std::string(magic) + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// SBM1

inline void write_sbm1(const SparseBinaryMatrix& m, std::ostream& out) {
  out.write("SBM1", 4);
  detail::put<std::uint32_t>(out, kSbm1Version);
  detail::put<std::uint64_t>(out, m.n_rows());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.n_cols()));
  detail::put<std::uint64_t>(out, m.nnz());
  detail::put_array(out, m.offsets());
  detail::put_array(out, m.indices());
  if (!out) throw IoError("failed writing SBM1 stream");
}

/// Header fields of an SBM1 stream.
struct Sbm1Header {
  std::uint64_t n_rows = 0;
  std::uint32_t n_cols = 0;
  std::uint64_t nnz = 0;
};

inline Sbm1Header read_sbm1_header(std::istream& in) {
  detail::expect_magic(in, "SBM1");
  const auto version = detail::get<std::uint32_t>(in, "version");
  if (version != kSbm1Version) {
    throw ParseError(ParseError::Reason::unsupported_version,
                     "unsupported SBM1 version " + std::to_string(version));
  }
  Sbm1Header h;
  h.n_rows = detail::get<std::uint64_t>(in, "N");
  h.n_cols = detail::get<std::uint32_t>(in, "D");
  h.nnz = detail::get<std::uint64_t>(in, "nnz");
  if (h.n_rows == std::numeric_limits<std::uint64_t>::max()) {
    throw ParseError(ParseError::Reason::invariant, "SBM1 row count overflows");
  }
  return h;
}

inline SparseBinaryMatrix read_sbm1(std::istream& in) {
  const auto h = read_sbm1_header(in);
  auto offsets = detail::get_array<RowOffset>(in, h.n_rows + 1, "offsets");
  auto indices = detail::get_array<ColumnId>(in, h.nnz, "indices");
  if (auto v = detail::csr_violation(h.n_rows, h.n_cols, offsets, indices)) {
    throw ParseError(ParseError::Reason::invariant, "SBM1 invariant violated: " + *v);
  }
  return SparseBinaryMatrix(h.n_rows, h.n_cols, std::move(offsets), std::move(indices));
}

inline void write_sbm1(const SparseBinaryMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_sbm1(m, out);
}

inline SparseBinaryMatrix read_sbm1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_sbm1(in);
}

/// Exact size in bytes of the SBM1 encoding of an N-row matrix with nnz entries.
constexpr std::uint64_t sbm1_size_bytes(std::uint64_t n_rows, std::uint64_t nnz) {
  return 4 + 4 + 8 + 4 + 8 + (n_rows + 1) * 8 + nnz * 4;
}

// ---------------------------------------------------------------------------
// SOMC

inline void write_somc(const Codebook& cb, std::ostream& out) {
  out.write("SOMC", 4);
  detail::put<std::uint32_t>(out, kSomcVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.side_x()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.side_y()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.dim()));
  detail::put_array(out, cb.weights());
  if (!out) throw IoError("failed writing SOMC stream");
}

inline Codebook read_somc(std::istream& in) {
  detail::expect_magic(in, "SOMC");
  const auto version = detail::get<std::uint32_t>(in, "version");
  if (version != kSomcVersion) {
    throw ParseError(ParseError::Reason::unsupported_version,
                     "unsupported SOMC version " + std::to_string(version));
  }
  const auto side_x = detail::get<std::uint32_t>(in, "side_x");
  const auto side_y = detail::get<std::uint32_t>(in, "side_y");
  const auto dim = detail::get<std::uint32_t>(in, "D");
  const std::uint64_t count = std::uint64_t{side_x} * side_y * dim;
  auto weights = detail::get_array<float>(in, count, "weights");
  try {
    return Codebook(GridGeometry{side_x, side_y}, dim, std::move(weights));
  } catch (const ArgumentError& e) {
    throw ParseError(ParseError::Reason::invariant, std::string("SOMC: ") + e.what());
  }
}

inline void write_somc(const Codebook& cb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_somc(cb, out);
}

inline Codebook read_somc(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_somc(in);
}

// ---------------------------------------------------------------------------
// LibSVM text

struct LibsvmData {
  SparseValueMatrix matrix;
  std::vector<double> labels;  ///< one per row, in file order
};

/// Parses `label idx:val ...` lines. Blank lines and `#` comments are skipped.
/// Column ids are shifted down by one when `one_based` is set.
inline LibsvmData read_libsvm_text(std::istream& in, std::size_t n_cols, bool one_based = true) {
  std::vector<RowOffset> offsets{0};
  std::vector<ColumnId> indices;
  std::vector<float> values;
  std::vector<double> labels;
  std::vector<std::pair<ColumnId, float>> row;

  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(ParseError::Reason::malformed,
                      "libsvm line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;

    double label = 0.0;
    {
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), label);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw fail("bad label '" + tok + "'");
      }
    }
    row.clear();
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw fail("malformed token '" + tok + "'");
      }
      std::uint64_t idx = 0;
      auto [p1, e1] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (e1 != std::errc() || p1 != tok.data() + colon) throw fail("bad index in '" + tok + "'");
      float val = 0.0f;
      auto [p2, e2] = std::from_chars(tok.data() + colon + 1, tok.data() + tok.size(), val);
      if (e2 != std::errc() || p2 != tok.data() + tok.size() || !std::isfinite(val)) {
        throw fail("bad value in '" + tok + "'");
      }
      if (one_based) {
        if (idx == 0) throw fail("index 0 in one-based input");
        --idx;
      }
      if (idx >= n_cols) {
        throw fail("index " + std::to_string(one_based ? idx + 1 : idx) + " out of range for " +
                   std::to_string(n_cols) + " columns");
      }
      row.emplace_back(static_cast<ColumnId>(idx), val);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t p = 1; p < row.size(); ++p) {
      if (row[p].first == row[p - 1].first) throw fail("duplicate index");
    }
    for (auto [c, v] : row) {
      indices.push_back(c);
      values.push_back(v);
    }
    offsets.push_back(indices.size());
    labels.push_back(label);
  }
  const auto n_rows = labels.size();
  return {SparseValueMatrix(n_rows, n_cols, std::move(offsets), std::move(indices),
                            std::move(values)),
          std::move(labels)};
}

inline void write_libsvm_text(const SparseValueMatrix& m, std::span<const double> labels,
                              std::ostream& out, bool one_based = true) {
  const auto precision = out.precision(std::numeric_limits<float>::max_digits10);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    out << (i < labels.size() ? labels[i] : 0.0);
    auto cols = m.row(i);
    auto vals = m.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      out << ' ' << (cols[p] + (one_based ? 1 : 0)) << ':' << vals[p];
    }
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace sombra
