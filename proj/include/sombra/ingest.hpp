#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sombra/codebook.hpp"
#include "sombra/error.hpp"
#include "sombra/matrix.hpp"
#include "sombra/vocabulary.hpp"
#include "sombra/xml_scanner.hpp"

namespace sombra {

struct IngestStats {
  std::uint64_t articles_seen = 0;      ///< PubmedArticle records read
  std::uint64_t skipped_no_pmid = 0;    ///< records without a MedlineCitation/PMID
  std::uint64_t duplicate_pmids = 0;    ///< earlier records replaced by a later one
  /// Distinct descriptor UIs over the retained records.
  std::uint64_t headings = 0;
  /// Of those, UIs absent from a fixed vocabulary.
  std::uint64_t dropped_unknown = 0;
  std::uint64_t descriptors_without_ui = 0;
};

struct MedlineCorpus {
  SparseBinaryMatrix matrix;
  Vocabulary vocab;
  std::vector<std::string> pmids;  ///< row order
  IngestStats stats;
};

/// Accumulates PubmedArticle records from one or more XML streams (plain or
/// gzip). A PMID seen again replaces the earlier record in place.
class MedlineCollector {
public:
  explicit MedlineCollector(std::optional<Vocabulary> fixed_vocab = std::nullopt)
      : fixed_(std::move(fixed_vocab)) {}

  void add_stream(std::istream& in) {
    xml::Scanner scanner(in);
    std::vector<std::string> path;
    bool in_article = false;
    std::string pmid;
    bool have_pmid = false;
    std::vector<std::uint32_t> uis;

    auto parent_is = [&](std::size_t up, const char* name) {
      return path.size() > up && path[path.size() - 1 - up] == name;
    };

    for (;;) {
      auto ev = scanner.next();
      switch (ev.kind) {
        case xml::EventKind::end_of_document: return;
        case xml::EventKind::start_element:
          if (ev.name == "PubmedArticle") {
            in_article = true;
            pmid.clear();
            have_pmid = false;
            uis.clear();
          } else if (in_article && ev.name == "PMID" && parent_is(0, "MedlineCitation")) {
            // Nested PMIDs (comments, corrections) sit deeper and are ignored.
            have_pmid = true;
            pmid.clear();
          } else if (in_article && ev.name == "DescriptorName" && parent_is(0, "MeshHeading") &&
                     parent_is(1, "MeshHeadingList")) {
            if (const auto* ui = ev.attribute("UI"); ui && !ui->empty()) {
              uis.push_back(intern(*ui));
            } else {
              ++stats_.descriptors_without_ui;
            }
          }
          path.push_back(std::move(ev.name));
          break;
        case xml::EventKind::end_element:
          path.pop_back();
          if (ev.name == "PubmedArticle" && in_article) {
            in_article = false;
            ++stats_.articles_seen;
            trim(pmid);
            if (!have_pmid || pmid.empty()) {
              ++stats_.skipped_no_pmid;
            } else {
              std::sort(uis.begin(), uis.end());
              uis.erase(std::unique(uis.begin(), uis.end()), uis.end());
              store(pmid, uis);
            }
          }
          break;
        case xml::EventKind::text:
          if (in_article && have_pmid && !path.empty() && path.back() == "PMID" &&
              parent_is(1, "MedlineCitation")) {
            pmid += ev.text;
          }
          break;
      }
    }
  }

  void add_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
      add_stream(in);
    } catch (const ParseError& e) {
      throw ParseError(e.reason(), path + ": " + e.what());
    }
  }

  /// Builds the matrix. Without a fixed vocabulary the columns are the UIs seen,
  /// sorted lexicographically.
  MedlineCorpus finish() const {
    MedlineCorpus out;
    out.stats = stats_;
    std::vector<std::optional<ColumnId>> column_of(names_.size());
    if (fixed_) {
      out.vocab = *fixed_;
      for (std::size_t t = 0; t < names_.size(); ++t) column_of[t] = fixed_->column(names_[t]);
    } else {
      std::vector<std::uint32_t> order(names_.size());
      for (std::uint32_t t = 0; t < order.size(); ++t) order[t] = t;
      std::sort(order.begin(), order.end(),
                [&](auto a, auto b) { return names_[a] < names_[b]; });
      std::vector<std::string> ids;
      ids.reserve(order.size());
      for (std::size_t c = 0; c < order.size(); ++c) {
        column_of[order[c]] = static_cast<ColumnId>(c);
        ids.push_back(names_[order[c]]);
      }
      out.vocab = Vocabulary(std::move(ids));
    }

    std::vector<std::vector<ColumnId>> rows;
    rows.reserve(records_.size());
    out.pmids.reserve(records_.size());
    for (const auto& r : records_) {
      out.pmids.push_back(r.pmid);
      auto& row = rows.emplace_back();
      for (auto t : r.uis) {
        ++out.stats.headings;
        if (column_of[t]) {
          row.push_back(*column_of[t]);
        } else {
          ++out.stats.dropped_unknown;
        }
      }
    }
    out.matrix = sbm_from_rows(rows, out.vocab.size());
    return out;
  }

private:
  struct Record {
    std::string pmid;
    std::vector<std::uint32_t> uis;
  };

  static void trim(std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
      s.clear();
      return;
    }
    s = s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
  }

  std::uint32_t intern(const std::string& ui) {
    auto [it, inserted] = ui_ids_.emplace(ui, static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.push_back(ui);
    return it->second;
  }

  void store(const std::string& pmid, const std::vector<std::uint32_t>& uis) {
    auto [it, inserted] = row_of_.emplace(pmid, records_.size());
    if (inserted) {
      records_.push_back({pmid, uis});
    } else {
      ++stats_.duplicate_pmids;
      records_[it->second].uis = uis;
    }
  }

  std::optional<Vocabulary> fixed_;
  std::unordered_map<std::string, std::uint32_t> ui_ids_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> row_of_;
  std::vector<Record> records_;
  IngestStats stats_;
};

/// Single-stream convenience wrapper.
inline MedlineCorpus parse_medline_xml(std::istream& in,
                                       std::optional<Vocabulary> vocab = std::nullopt) {
  MedlineCollector c(std::move(vocab));
  c.add_stream(in);
  return c.finish();
}

struct SynthOptions {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t nnz_low = 5;
  std::size_t nnz_high = 15;
  std::uint64_t seed = 0;
  /// Draw each row from one of k column bands instead of all of [0, D).
  std::optional<std::size_t> clusters = std::nullopt;
  /// Columns each band extends into its neighbours on both sides.
  std::size_t overlap = 0;
};

/// Half-open column range of band b when D columns are split into k bands.
inline std::pair<std::size_t, std::size_t> synth_band(std::size_t d, std::size_t k,
                                                      std::size_t overlap, std::size_t b) {
  const std::size_t lo = b * d / k;
  const std::size_t hi = (b + 1) * d / k;
  return {lo > overlap ? lo - overlap : 0, std::min(d, hi + overlap)};
}

/// Random binary rows: size uniform in {nnz_low..nnz_high}, columns without
/// replacement. `cluster_of`, when given, receives each row's band.
inline SparseBinaryMatrix synth_generate(const SynthOptions& opt,
                                         std::vector<std::uint32_t>* cluster_of = nullptr) {
  if (opt.nnz_low > opt.nnz_high) {
    throw ArgumentError("nnz_low " + std::to_string(opt.nnz_low) + " exceeds nnz_high " +
                        std::to_string(opt.nnz_high));
  }
  if (opt.nnz_high > opt.d) {
    throw ArgumentError("nnz_high " + std::to_string(opt.nnz_high) + " exceeds D " +
                        std::to_string(opt.d));
  }
  if (opt.d > std::numeric_limits<ColumnId>::max()) throw CapacityError("D exceeds 32-bit ids");
  std::size_t k = 1;
  if (opt.clusters) {
    k = *opt.clusters;
    if (k == 0 || k > opt.d) throw ArgumentError("clusters must be in [1, D]");
    for (std::size_t b = 0; b < k; ++b) {
      auto [lo, hi] = synth_band(opt.d, k, opt.overlap, b);
      if (hi - lo < opt.nnz_high) {
        throw ArgumentError("band " + std::to_string(b) + " has " + std::to_string(hi - lo) +
                            " columns, fewer than nnz_high " + std::to_string(opt.nnz_high));
      }
    }
  }

  std::mt19937_64 rng(opt.seed);
  std::vector<RowOffset> offsets;
  offsets.reserve(opt.n + 1);
  offsets.push_back(0);
  std::vector<ColumnId> indices;
  indices.reserve(opt.n * (opt.nnz_low + opt.nnz_high) / 2);
  if (cluster_of) cluster_of->assign(opt.n, 0);
  std::vector<ColumnId> row;
  for (std::size_t i = 0; i < opt.n; ++i) {
    const std::size_t size =
        opt.nnz_low + detail::uniform_below(rng, opt.nnz_high - opt.nnz_low + 1);
    std::size_t lo = 0;
    std::size_t span = opt.d;
    if (opt.clusters) {
      const auto b = detail::uniform_below(rng, k);
      if (cluster_of) (*cluster_of)[i] = static_cast<std::uint32_t>(b);
      auto [blo, bhi] = synth_band(opt.d, k, opt.overlap, b);
      lo = blo;
      span = bhi - blo;
    }
    // Floyd's sampling: `size` distinct values from [0, span).
    row.clear();
    for (std::size_t j = span - size; j < span; ++j) {
      const auto t = static_cast<ColumnId>(detail::uniform_below(rng, j + 1));
      const bool seen = std::find(row.begin(), row.end(), t) != row.end();
      row.push_back(seen ? static_cast<ColumnId>(j) : t);
    }
    for (auto& c : row) c = static_cast<ColumnId>(c + lo);
    std::sort(row.begin(), row.end());
    indices.insert(indices.end(), row.begin(), row.end());
    offsets.push_back(indices.size());
  }
  return SparseBinaryMatrix(opt.n, opt.d, std::move(offsets), std::move(indices));
}

}  // namespace sombra
