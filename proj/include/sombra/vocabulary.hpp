#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sombra/error.hpp"
#include "sombra/matrix.hpp"

namespace sombra {

/// Ordered list of descriptor identifiers; position is the column index.
class Vocabulary {
public:
  Vocabulary() = default;

  /// Throws ArgumentError on a duplicate or empty identifier.
  explicit Vocabulary(std::vector<std::string> ids) : ids_(std::move(ids)) {
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (ids_[i].empty()) throw ArgumentError("empty identifier at column " + std::to_string(i));
      if (!index_.emplace(ids_[i], static_cast<ColumnId>(i)).second) {
        throw ArgumentError("duplicate identifier '" + ids_[i] + "' at column " +
                            std::to_string(i));
      }
    }
  }

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(ColumnId column) const { return ids_.at(column); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  std::optional<ColumnId> column(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.ids_ == b.ids_; }

private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, ColumnId> index_;
};

/// One identifier per line; line number (0-based) is the column index.
inline void save_vocab(const Vocabulary& vocab, std::ostream& out) {
  for (const auto& id : vocab.ids()) out << id << '\n';
  if (!out) throw IoError("failed writing vocabulary");
}

inline Vocabulary load_vocab(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      throw ParseError(ParseError::Reason::malformed,
                       "vocabulary line " + std::to_string(line_no) + " is empty");
    }
    ids.push_back(std::move(line));
  }
  try {
    return Vocabulary(std::move(ids));
  } catch (const ArgumentError& e) {
    throw ParseError(ParseError::Reason::invariant, std::string("vocabulary: ") + e.what());
  }
}

inline void save_vocab(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  save_vocab(vocab, out);
}

inline Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return load_vocab(in);
}

}  // namespace sombra
