#pragma once

// Minimal streaming XML tokenizer: elements, attributes, character data,
// CDATA, comments, processing instructions and DOCTYPE (skipped). Input may be
// gzip-compressed; compression is detected from the first two bytes.

#include <zlib.h>

#include <array>
#include <cstdint>
#include <istream>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sombra/error.hpp"

namespace sombra::xml {

/// Byte stream over an istream, inflating gzip transparently.
class ByteSource {
public:
  explicit ByteSource(std::istream& in) : in_(in) {
    fill_raw();
    if (raw_end_ >= 2 && static_cast<unsigned char>(raw_[0]) == 0x1f &&
        static_cast<unsigned char>(raw_[1]) == 0x8b) {
      gzip_ = true;
      zs_ = std::make_unique<z_stream>();
      if (inflateInit2(zs_.get(), 15 + 32) != Z_OK) {
        throw IoError("zlib initialisation failed");
      }
    }
  }

  ~ByteSource() {
    if (zs_) inflateEnd(zs_.get());
  }
  ByteSource(const ByteSource&) = delete;
  ByteSource& operator=(const ByteSource&) = delete;

  /// Next byte or -1 at end of stream.
  int get() {
    if (pos_ == end_ && !refill()) return -1;
    ++offset_;
    return static_cast<unsigned char>(buf_[pos_++]);
  }

  int peek() {
    if (pos_ == end_ && !refill()) return -1;
    return static_cast<unsigned char>(buf_[pos_]);
  }

  /// Bytes consumed so far (of the decompressed stream).
  std::uint64_t offset() const noexcept { return offset_; }

private:
  static constexpr std::size_t kChunk = 1 << 16;

  void fill_raw() {
    in_.read(raw_.data(), kChunk);
    raw_end_ = static_cast<std::size_t>(in_.gcount());
    raw_pos_ = 0;
  }

  bool refill() {
    pos_ = 0;
    end_ = 0;
    if (!gzip_) {
      if (raw_pos_ < raw_end_) {
        std::copy(raw_.begin() + static_cast<std::ptrdiff_t>(raw_pos_),
                  raw_.begin() + static_cast<std::ptrdiff_t>(raw_end_), buf_.begin());
        end_ = raw_end_ - raw_pos_;
        raw_pos_ = raw_end_;
        return true;
      }
      fill_raw();
      if (raw_end_ == 0) return false;
      return refill();
    }
    while (end_ == 0) {
      if (raw_pos_ == raw_end_) {
        if (stream_done_) return false;
        fill_raw();
        if (raw_end_ == 0) {
          if (!member_done_) throw ParseError(ParseError::Reason::truncated, "truncated gzip stream");
          return false;
        }
      }
      if (member_done_) {
        // Concatenated gzip members.
        inflateReset(zs_.get());
        member_done_ = false;
      }
      zs_->next_in = reinterpret_cast<Bytef*>(raw_.data() + raw_pos_);
      zs_->avail_in = static_cast<uInt>(raw_end_ - raw_pos_);
      zs_->next_out = reinterpret_cast<Bytef*>(buf_.data());
      zs_->avail_out = static_cast<uInt>(kChunk);
      const int rc = inflate(zs_.get(), Z_NO_FLUSH);
      raw_pos_ = raw_end_ - zs_->avail_in;
      end_ = kChunk - zs_->avail_out;
      if (rc == Z_STREAM_END) {
        member_done_ = true;
        if (raw_pos_ == raw_end_ && in_.peek() == std::char_traits<char>::eof()) stream_done_ = true;
      } else if (rc != Z_OK && rc != Z_BUF_ERROR) {
        throw ParseError(ParseError::Reason::malformed,
                         std::string("gzip inflate failed: ") + (zs_->msg ? zs_->msg : "unknown"));
      }
    }
    return true;
  }

  std::istream& in_;
  std::array<char, kChunk> raw_{};
  std::array<char, kChunk> buf_{};
  std::size_t raw_pos_ = 0, raw_end_ = 0;
  std::size_t pos_ = 0, end_ = 0;
  std::uint64_t offset_ = 0;
  bool gzip_ = false;
  bool member_done_ = false;
  bool stream_done_ = false;
  std::unique_ptr<z_stream> zs_;
};

enum class EventKind { start_element, end_element, text, end_of_document };

struct Event {
  EventKind kind = EventKind::end_of_document;
  std::string name;  ///< element name for start/end
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  ///< decoded character data for text events
  bool self_closing = false;

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

/// Pull tokenizer. Checks tag nesting; a self-closing element yields a start
/// event followed by a matching end event.
class Scanner {
public:
  explicit Scanner(std::istream& in) : src_(in) {}

  std::uint64_t offset() const noexcept { return src_.offset(); }

  Event next() {
    Event ev;
    if (pending_end_) {
      ev.kind = EventKind::end_element;
      ev.name = std::move(*pending_end_);
      pending_end_.reset();
      return ev;
    }
    for (;;) {
      int c = src_.peek();
      if (c < 0) {
        if (!stack_.empty()) fail("unexpected end of document inside <" + stack_.back() + ">");
        ev.kind = EventKind::end_of_document;
        return ev;
      }
      if (c != '<') {
        ev.kind = EventKind::text;
        read_text(ev.text);
        if (stack_.empty()) {
          for (char ch : ev.text) {
            if (!is_space(ch)) fail("character data outside the root element");
          }
          continue;
        }
        return ev;
      }
      src_.get();
      c = src_.peek();
      if (c == '?') {
        skip_until("?>");
        continue;
      }
      if (c == '!') {
        src_.get();
        if (try_consume("--")) {
          skip_until("-->");
          continue;
        }
        if (try_consume("[CDATA[")) {
          if (stack_.empty()) fail("CDATA outside the root element");
          ev.kind = EventKind::text;
          read_until("]]>", ev.text);
          return ev;
        }
        skip_declaration();
        continue;
      }
      if (c == '/') {
        src_.get();
        ev.kind = EventKind::end_element;
        ev.name = read_name();
        skip_space();
        expect('>');
        if (stack_.empty() || stack_.back() != ev.name) {
          fail("mismatched closing tag </" + ev.name + ">" +
               (stack_.empty() ? std::string() : " (open: <" + stack_.back() + ">)"));
        }
        stack_.pop_back();
        return ev;
      }
      ev.kind = EventKind::start_element;
      ev.name = read_name();
      for (;;) {
        skip_space();
        c = src_.peek();
        if (c == '/') {
          src_.get();
          expect('>');
          ev.self_closing = true;
          pending_end_ = ev.name;
          break;
        }
        if (c == '>') {
          src_.get();
          stack_.push_back(ev.name);
          break;
        }
        if (c < 0) fail("unexpected end of document in tag <" + ev.name + ">");
        std::string key = read_name();
        skip_space();
        expect('=');
        skip_space();
        const int quote = src_.get();
        if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
        std::string value;
        for (;;) {
          const int ch = src_.get();
          if (ch < 0) fail("unexpected end of document in attribute value");
          if (ch == quote) break;
          if (ch == '<') fail("'<' inside attribute value");
          if (ch == '&') {
            append_entity(value);
          } else {
            value.push_back(static_cast<char>(ch));
          }
        }
        ev.attributes.emplace_back(std::move(key), std::move(value));
      }
      if (stack_.empty() && ev.self_closing) root_closed_ = true;
      return ev;
    }
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(ParseError::Reason::malformed,
                     "XML error at byte " + std::to_string(src_.offset()) + ": " + msg);
  }

  static bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
  static bool is_name_char(int c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == ':' || c == '-' || c == '.' || c >= 0x80;
  }

  void skip_space() {
    while (is_space(src_.peek())) src_.get();
  }

  void expect(char want) {
    const int c = src_.get();
    if (c != want) {
      fail(std::string("expected '") + want + "'" +
           (c < 0 ? std::string(" before end of document") : std::string(" got '") + static_cast<char>(c) + "'"));
    }
  }

  std::string read_name() {
    std::string name;
    while (is_name_char(src_.peek())) name.push_back(static_cast<char>(src_.get()));
    if (name.empty()) fail("expected a name");
    return name;
  }

  bool try_consume(std::string_view s) {
    // Only used right after "<!", where the alternatives diverge on the first byte.
    if (src_.peek() != static_cast<unsigned char>(s[0])) return false;
    for (char want : s) {
      if (src_.get() != static_cast<unsigned char>(want)) fail("malformed markup declaration");
    }
    return true;
  }

  void read_until(std::string_view terminator, std::string& out) {
    for (;;) {
      const int c = src_.get();
      if (c < 0) fail("unterminated section, expected '" + std::string(terminator) + "'");
      out.push_back(static_cast<char>(c));
      if (out.size() >= terminator.size() &&
          std::string_view(out).substr(out.size() - terminator.size()) == terminator) {
        out.resize(out.size() - terminator.size());
        return;
      }
    }
  }

  void skip_until(std::string_view terminator) {
    std::string sink;
    read_until(terminator, sink);
  }

  void skip_declaration() {
    // <!DOCTYPE ...> possibly with an internal subset in brackets.
    int depth = 0;
    for (;;) {
      const int c = src_.get();
      if (c < 0) fail("unterminated declaration");
      if (c == '[') ++depth;
      else if (c == ']') --depth;
      else if (c == '>' && depth <= 0) return;
    }
  }

  void read_text(std::string& out) {
    for (;;) {
      const int c = src_.peek();
      if (c < 0 || c == '<') return;
      src_.get();
      if (c == '&') {
        append_entity(out);
      } else {
        out.push_back(static_cast<char>(c));
      }
    }
  }

  void append_entity(std::string& out) {
    std::string name;
    for (;;) {
      const int c = src_.get();
      if (c < 0) fail("unterminated entity reference");
      if (c == ';') break;
      name.push_back(static_cast<char>(c));
      if (name.size() > 16) fail("entity reference too long");
    }
    if (name == "amp") out.push_back('&');
    else if (name == "lt") out.push_back('<');
    else if (name == "gt") out.push_back('>');
    else if (name == "quot") out.push_back('"');
    else if (name == "apos") out.push_back('\'');
    else if (name.size() > 1 && name[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = name[1] == 'x' ? std::stoul(name.substr(2), nullptr, 16) : std::stoul(name.substr(1));
      } catch (const std::exception&) {
        fail("bad character reference &" + name + ";");
      }
      append_utf8(out, cp);
    } else {
      // Unknown named entities (e.g. from a DTD) are kept verbatim.
      out += "&" + name + ";";
    }
  }

  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  ByteSource src_;
  std::vector<std::string> stack_;
  std::optional<std::string> pending_end_;
  bool root_closed_ = false;
};

}  // namespace sombra::xml
