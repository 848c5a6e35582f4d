#include "scenforge/dsl/yaml_lite.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>

namespace scenforge::dsl::yaml {
namespace {

struct Line {
  int indent = 0;
  std::string text;      // comment-stripped, indentation removed, right-trimmed
  std::string raw;       // original line without the newline
  int lineno = 0;
  bool block_content = false;  // belongs to a preceding | or > scalar
  bool quote_continuation = false;  // starts inside an open quoted scalar
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_null_word(std::string_view s) {
  return s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL";
}

bool is_block_indicator(std::string_view v) {
  if (v.empty() || (v[0] != '|' && v[0] != '>')) return false;
  v.remove_prefix(1);
  return v.empty() || v == "-" || v == "+";
}

/// Value text of a line if the line ends in a value position (after "key:" or
/// "- "), used to spot block scalar headers.
std::string_view trailing_value(std::string_view text) {
  std::string_view t = text;
  while (t.size() >= 2 && t[0] == '-' && t[1] == ' ') t = trim(t.substr(2));
  if (is_block_indicator(t)) return t;
  const auto pos = t.rfind(": ");
  if (pos == std::string_view::npos) return {};
  return trim(t.substr(pos + 2));
}

// Scanner state carried across lines so that comments inside quoted scalars
// and apostrophes inside plain scalars are both handled.
struct ScanState {
  char quote = 0;
  int flow_depth = 0;
};

std::string strip_comment(std::string_view s, ScanState& st) {
  std::string out;
  bool value_start = true;
  bool prev_space = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (st.quote == '"') {
      out.push_back(c);
      if (c == '\\' && i + 1 < s.size()) {
        out.push_back(s[++i]);
      } else if (c == '"') {
        st.quote = 0;
      }
      prev_space = false;
      continue;
    }
    if (st.quote == '\'') {
      out.push_back(c);
      if (c == '\'') {
        if (i + 1 < s.size() && s[i + 1] == '\'') {
          out.push_back(s[++i]);
        } else {
          st.quote = 0;
        }
      }
      prev_space = false;
      continue;
    }
    if (c == '#' && prev_space) break;
    if ((c == '"' || c == '\'') && value_start) {
      st.quote = c;
      out.push_back(c);
      value_start = false;
      prev_space = false;
      continue;
    }
    out.push_back(c);
    const bool next_is_space = i + 1 >= s.size() || s[i + 1] == ' ';
    if (c == ' ' || c == '\t') {
      prev_space = true;
      continue;
    }
    prev_space = false;
    if ((c == '-' && value_start && next_is_space) || (c == ':' && next_is_space)) {
      value_start = true;
    } else if ((c == '[' || c == '{') && value_start) {
      ++st.flow_depth;
      value_start = true;
    } else if (st.flow_depth > 0 && c == ',') {
      value_start = true;
    } else if (st.flow_depth > 0 && (c == ']' || c == '}')) {
      --st.flow_depth;
      value_start = false;
    } else {
      value_start = false;
    }
  }
  return std::string(trim(out));
}

std::vector<Line> split_lines(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<Line> out;
  ScanState st;
  int block_parent = -1;  // indent of the line opening a block scalar
  int lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    ++lineno;
    start = end + 1;

    int indent = 0;
    while (indent < static_cast<int>(raw.size()) && raw[indent] == ' ') ++indent;
    const bool blank = trim(raw).empty();

    if (block_parent >= 0) {
      if (blank || indent > block_parent) {
        Line l;
        l.indent = indent;
        l.raw = std::string(raw);
        l.lineno = lineno;
        l.block_content = true;
        out.push_back(std::move(l));
        if (end == text.size()) break;
        continue;
      }
      block_parent = -1;
    }

    const bool continuation = st.quote != 0 || st.flow_depth > 0;
    if (!continuation && indent < static_cast<int>(raw.size()) && raw[indent] == '\t') {
      throw SyntaxError(lineno, "tab character in indentation");
    }
    std::string stripped = strip_comment(raw.substr(indent), st);
    if (!stripped.empty() || continuation) {
      Line l;
      l.indent = indent;
      l.text = std::move(stripped);
      l.raw = std::string(raw);
      l.lineno = lineno;
      l.quote_continuation = continuation;
      if (!l.text.empty() || continuation) {
        if (!continuation && is_block_indicator(trailing_value(l.text))) block_parent = indent;
        out.push_back(std::move(l));
      }
    }
    if (end == text.size()) break;
  }
  // Trailing blank block-content lines carry no information.
  while (!out.empty() && out.back().block_content && trim(out.back().raw).empty()) out.pop_back();
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
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

class Parser {
 public:
  explicit Parser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  Node document() {
    strip_markers();
    if (lines_.empty()) return Node{};
    Node root = block(lines_[0].indent);
    if (pos_ < lines_.size()) {
      throw SyntaxError(lines_[pos_].lineno, "unexpected content after document root");
    }
    return root;
  }

 private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;

  void strip_markers() {
    std::vector<Line> kept;
    bool seen_start = false;
    bool ended = false;
    for (auto& l : lines_) {
      if (l.block_content || l.quote_continuation) {
        kept.push_back(std::move(l));
        continue;
      }
      if (ended) throw SyntaxError(l.lineno, "content after document end marker");
      if (l.indent == 0 && !l.text.empty() && l.text[0] == '%') {
        throw SyntaxError(l.lineno, "directives are not supported");
      }
      if (l.indent == 0 && l.text == "---") {
        if (seen_start || !kept.empty()) throw SyntaxError(l.lineno, "multiple documents are not supported");
        seen_start = true;
        continue;
      }
      if (l.indent == 0 && l.text == "...") {
        ended = true;
        continue;
      }
      if (l.indent == 0 && l.text.rfind("--- ", 0) == 0) {
        throw SyntaxError(l.lineno, "inline content after document start marker");
      }
      kept.push_back(std::move(l));
    }
    lines_ = std::move(kept);
  }

  static bool is_seq_item(std::string_view t) { return t == "-" || t.rfind("- ", 0) == 0; }

  // Position of the key/value colon outside quotes and brackets, or npos.
  static std::size_t mapping_colon(std::string_view t) {
    if (t.empty() || t[0] == '[' || t[0] == '{') return std::string_view::npos;
    char quote = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const char c = t[i];
      if (quote == '"') {
        if (c == '\\') ++i;
        else if (c == '"') quote = 0;
        continue;
      }
      if (quote == '\'') {
        if (c == '\'') quote = 0;
        continue;
      }
      if ((c == '"' || c == '\'') && i == 0) {
        quote = c;
        continue;
      }
      if (c == ':' && (i + 1 == t.size() || t[i + 1] == ' ')) return i;
    }
    return std::string_view::npos;
  }

  Node block(int indent) {
    Line& l = lines_[pos_];
    if (l.indent != indent) throw SyntaxError(l.lineno, "bad indentation");
    if (is_seq_item(l.text)) return sequence(indent);
    if (mapping_colon(l.text) != std::string_view::npos) return mapping(indent);
    ++pos_;
    Node n = inline_value(l.text, l.lineno, indent - 1);
    if (pos_ < lines_.size() && lines_[pos_].indent > indent && !lines_[pos_].block_content) {
      throw SyntaxError(lines_[pos_].lineno, "unexpected indentation");
    }
    return n;
  }

  Node sequence(int indent) {
    Node n;
    n.kind = Node::Kind::sequence;
    n.line = lines_[pos_].lineno;
    while (pos_ < lines_.size()) {
      Line& l = lines_[pos_];
      if (l.block_content || l.quote_continuation) throw SyntaxError(l.lineno, "unexpected continuation line");
      if (l.indent < indent) break;
      if (l.indent > indent) throw SyntaxError(l.lineno, "bad indentation in sequence");
      if (!is_seq_item(l.text)) break;
      std::size_t off = 1;
      while (off < l.text.size() && l.text[off] == ' ') ++off;
      if (off >= l.text.size()) {
        ++pos_;
        if (pos_ < lines_.size() && lines_[pos_].indent > indent && !lines_[pos_].block_content) {
          n.items.push_back(block(lines_[pos_].indent));
        } else {
          Node empty;
          empty.line = l.lineno;
          n.items.push_back(empty);
        }
        continue;
      }
      std::string rest = l.text.substr(off);
      if (is_block_indicator(rest)) {
        ++pos_;
        n.items.push_back(block_scalar(rest, l.lineno, indent));
        continue;
      }
      // Re-read the remainder of the line as a node nested at its column.
      l.indent += static_cast<int>(off);
      l.text = std::move(rest);
      n.items.push_back(block(l.indent));
    }
    return n;
  }

  Node mapping(int indent) {
    Node n;
    n.kind = Node::Kind::mapping;
    n.line = lines_[pos_].lineno;
    while (pos_ < lines_.size()) {
      Line& l = lines_[pos_];
      if (l.block_content || l.quote_continuation) throw SyntaxError(l.lineno, "unexpected continuation line");
      if (l.indent < indent) break;
      if (l.indent > indent) throw SyntaxError(l.lineno, "bad indentation in mapping");
      if (is_seq_item(l.text)) throw SyntaxError(l.lineno, "sequence item where a mapping key was expected");
      const auto colon = mapping_colon(l.text);
      if (colon == std::string_view::npos) throw SyntaxError(l.lineno, "expected 'key: value'");
      const std::string key = parse_key(std::string_view(l.text).substr(0, colon), l.lineno);
      for (const auto& [k, _] : n.entries) {
        if (k == key) throw SyntaxError(l.lineno, "duplicate key '" + key + "'");
      }
      const std::string value_text(trim(std::string_view(l.text).substr(colon + 1)));
      const int lineno = l.lineno;
      ++pos_;
      Node value;
      if (value_text.empty()) {
        if (pos_ < lines_.size() && !lines_[pos_].block_content && lines_[pos_].indent > indent) {
          value = block(lines_[pos_].indent);
        } else if (pos_ < lines_.size() && lines_[pos_].indent == indent && is_seq_item(lines_[pos_].text)) {
          value = sequence(indent);
        } else {
          value.line = lineno;
        }
      } else if (is_block_indicator(value_text)) {
        value = block_scalar(value_text, lineno, indent);
      } else {
        value = inline_value(value_text, lineno, indent);
        if (pos_ < lines_.size() && lines_[pos_].indent > indent && !lines_[pos_].block_content) {
          throw SyntaxError(lines_[pos_].lineno, "unexpected indentation");
        }
      }
      n.entries.emplace_back(key, std::move(value));
    }
    return n;
  }

  std::string parse_key(std::string_view k, int lineno) {
    k = trim(k);
    if (k.empty()) throw SyntaxError(lineno, "empty mapping key");
    if (k[0] == '"' || k[0] == '\'') {
      std::size_t i = 0;
      std::string out = quoted(k, i, lineno);
      if (i != k.size()) throw SyntaxError(lineno, "trailing characters after quoted key");
      return out;
    }
    check_plain_start(k, lineno);
    if (k[0] == '?') throw SyntaxError(lineno, "complex mapping keys are not supported");
    return std::string(k);
  }

  static void check_plain_start(std::string_view v, int lineno) {
    switch (v[0]) {
      case '&': throw SyntaxError(lineno, "anchors are not supported");
      case '*': throw SyntaxError(lineno, "aliases are not supported");
      case '!': throw SyntaxError(lineno, "tags are not supported");
      case '@':
      case '`': throw SyntaxError(lineno, "reserved indicator at start of scalar");
      default: break;
    }
  }

  // A value written on the key line (or item line). Quoted and flow values may
  // continue on following lines.
  Node inline_value(std::string text, int lineno, int parent_indent) {
    Node n;
    n.line = lineno;
    const char c0 = text[0];
    if (c0 == '"' || c0 == '\'') {
      while (!quote_closed(text) && pos_ < lines_.size() && lines_[pos_].quote_continuation) {
        text += '\n';
        text += trim(lines_[pos_].raw);
        ++pos_;
      }
      std::size_t i = 0;
      n.kind = Node::Kind::scalar;
      n.quoted = true;
      n.scalar = quoted(text, i, lineno);
      if (!trim(std::string_view(text).substr(i)).empty()) {
        throw SyntaxError(lineno, "trailing characters after quoted scalar");
      }
      return n;
    }
    if (c0 == '[' || c0 == '{') {
      while (!flow_balanced(text) && pos_ < lines_.size() && lines_[pos_].quote_continuation) {
        text += ' ';
        text += lines_[pos_].text.empty() ? std::string(trim(lines_[pos_].raw)) : lines_[pos_].text;
        ++pos_;
      }
      std::size_t i = 0;
      n = flow_node(text, i, lineno);
      skip_spaces(text, i);
      if (i != text.size()) throw SyntaxError(lineno, "trailing characters after flow collection");
      return n;
    }
    check_plain_start(text, lineno);
    // Folded plain scalar continuation lines.
    while (pos_ < lines_.size() && !lines_[pos_].block_content && lines_[pos_].indent > parent_indent &&
           lines_[pos_].indent > 0 && !is_seq_item(lines_[pos_].text) &&
           mapping_colon(lines_[pos_].text) == std::string_view::npos && parent_indent >= 0) {
      text += ' ';
      text += lines_[pos_].text;
      ++pos_;
    }
    if (is_null_word(text)) return n;
    n.kind = Node::Kind::scalar;
    n.scalar = text;
    return n;
  }

  Node block_scalar(std::string_view header, int lineno, int parent_indent) {
    const bool folded = header[0] == '>';
    const char chomp = header.size() > 1 ? header[1] : 0;
    std::vector<std::string_view> content;
    int content_indent = -1;
    while (pos_ < lines_.size() && lines_[pos_].block_content) {
      const Line& l = lines_[pos_];
      const bool blank = trim(l.raw).empty();
      if (!blank && content_indent < 0) content_indent = l.indent;
      if (!blank && l.indent < content_indent) throw SyntaxError(l.lineno, "bad indentation in block scalar");
      if (!blank && l.indent <= parent_indent) break;
      content.push_back(blank ? std::string_view{} : std::string_view(l.raw).substr(content_indent));
      ++pos_;
    }
    std::string out;
    for (std::size_t i = 0; i < content.size(); ++i) {
      if (i > 0) {
        const bool join_space = folded && !content[i].empty() && !content[i - 1].empty();
        out += join_space ? ' ' : '\n';
      }
      out += content[i];
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    if (chomp != '-' && !out.empty()) out += '\n';
    Node n;
    n.kind = Node::Kind::scalar;
    n.quoted = true;
    n.scalar = std::move(out);
    n.line = lineno;
    return n;
  }

  static bool quote_closed(std::string_view t) {
    const char q = t[0];
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (q == '"' && t[i] == '\\') {
        ++i;
        continue;
      }
      if (t[i] == q) {
        if (q == '\'' && i + 1 < t.size() && t[i + 1] == '\'') {
          ++i;
          continue;
        }
        return true;
      }
    }
    return false;
  }

  static bool flow_balanced(std::string_view t) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const char c = t[i];
      if (quote) {
        if (quote == '"' && c == '\\') ++i;
        else if (c == quote) quote = 0;
        continue;
      }
      if (c == '"' || c == '\'') quote = c;
      else if (c == '[' || c == '{') ++depth;
      else if (c == ']' || c == '}') --depth;
    }
    return depth <= 0 && quote == 0;
  }

  static void skip_spaces(std::string_view t, std::size_t& i) {
    while (i < t.size() && (t[i] == ' ' || t[i] == '\n' || t[i] == '\t')) ++i;
  }

  std::string quoted(std::string_view t, std::size_t& i, int lineno) {
    const char q = t[i++];
    std::string out;
    while (true) {
      if (i >= t.size()) throw SyntaxError(lineno, "unterminated quoted scalar");
      const char c = t[i++];
      if (c == q) {
        if (q == '\'' && i < t.size() && t[i] == '\'') {
          out.push_back('\'');
          ++i;
          continue;
        }
        return out;
      }
      if (c == '\n') {
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out.push_back(' ');
        while (i < t.size() && t[i] == ' ') ++i;
        continue;
      }
      if (q == '"' && c == '\\') {
        if (i >= t.size()) throw SyntaxError(lineno, "dangling escape");
        const char e = t[i++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '0': out.push_back('\0'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case '/': out.push_back('/'); break;
          case ' ': out.push_back(' '); break;
          case 'x':
          case 'u':
          case 'U': {
            const std::size_t len = e == 'x' ? 2 : (e == 'u' ? 4 : 8);
            if (i + len > t.size()) throw SyntaxError(lineno, "truncated escape");
            std::uint32_t cp = 0;
            for (std::size_t k = 0; k < len; ++k) {
              const char h = t[i + k];
              cp <<= 4;
              if (h >= '0' && h <= '9') cp |= static_cast<std::uint32_t>(h - '0');
              else if (h >= 'a' && h <= 'f') cp |= static_cast<std::uint32_t>(h - 'a' + 10);
              else if (h >= 'A' && h <= 'F') cp |= static_cast<std::uint32_t>(h - 'A' + 10);
              else throw SyntaxError(lineno, "bad hex escape");
            }
            i += len;
            append_utf8(out, cp);
            break;
          }
          default: throw SyntaxError(lineno, std::string("unknown escape \\") + e);
        }
        continue;
      }
      out.push_back(c);
    }
  }

  Node flow_node(std::string_view t, std::size_t& i, int lineno) {
    skip_spaces(t, i);
    if (i >= t.size()) throw SyntaxError(lineno, "unexpected end of flow collection");
    Node n;
    n.line = lineno;
    const char c = t[i];
    if (c == '[') {
      n.kind = Node::Kind::sequence;
      ++i;
      skip_spaces(t, i);
      if (i < t.size() && t[i] == ']') {
        ++i;
        return n;
      }
      while (true) {
        n.items.push_back(flow_node(t, i, lineno));
        skip_spaces(t, i);
        if (i >= t.size()) throw SyntaxError(lineno, "unterminated flow sequence");
        if (t[i] == ',') {
          ++i;
          skip_spaces(t, i);
          if (i < t.size() && t[i] == ']') {
            ++i;
            return n;
          }
          continue;
        }
        if (t[i] == ']') {
          ++i;
          return n;
        }
        throw SyntaxError(lineno, "expected ',' or ']' in flow sequence");
      }
    }
    if (c == '{') {
      n.kind = Node::Kind::mapping;
      ++i;
      skip_spaces(t, i);
      if (i < t.size() && t[i] == '}') {
        ++i;
        return n;
      }
      while (true) {
        skip_spaces(t, i);
        Node key = flow_scalar(t, i, lineno, true);
        if (!key.is_scalar()) throw SyntaxError(lineno, "flow mapping key must be a scalar");
        skip_spaces(t, i);
        if (i >= t.size() || t[i] != ':') throw SyntaxError(lineno, "expected ':' in flow mapping");
        ++i;
        for (const auto& [k, _] : n.entries) {
          if (k == key.scalar) throw SyntaxError(lineno, "duplicate key '" + key.scalar + "'");
        }
        skip_spaces(t, i);
        Node value;
        value.line = lineno;
        if (i < t.size() && t[i] != ',' && t[i] != '}') value = flow_node(t, i, lineno);
        n.entries.emplace_back(key.scalar, std::move(value));
        skip_spaces(t, i);
        if (i >= t.size()) throw SyntaxError(lineno, "unterminated flow mapping");
        if (t[i] == ',') {
          ++i;
          skip_spaces(t, i);
          if (i < t.size() && t[i] == '}') {
            ++i;
            return n;
          }
          continue;
        }
        if (t[i] == '}') {
          ++i;
          return n;
        }
        throw SyntaxError(lineno, "expected ',' or '}' in flow mapping");
      }
    }
    return flow_scalar(t, i, lineno, false);
  }

  Node flow_scalar(std::string_view t, std::size_t& i, int lineno, bool is_key) {
    Node n;
    n.line = lineno;
    if (t[i] == '"' || t[i] == '\'') {
      n.kind = Node::Kind::scalar;
      n.quoted = true;
      n.scalar = quoted(t, i, lineno);
      return n;
    }
    const std::size_t start = i;
    while (i < t.size()) {
      const char c = t[i];
      if (c == ',' || c == ']' || c == '}' || c == '[' || c == '{') break;
      if (c == ':' && (is_key || i + 1 >= t.size() || t[i + 1] == ' ')) break;
      ++i;
    }
    const std::string_view text = trim(t.substr(start, i - start));
    if (!text.empty()) check_plain_start(text, lineno);
    if (is_null_word(text)) {
      if (is_key) throw SyntaxError(lineno, "empty flow mapping key");
      return n;
    }
    n.kind = Node::Kind::scalar;
    n.scalar = std::string(text);
    return n;
  }
};

}  // namespace

const Node* Node::get(std::string_view key) const {
  if (kind != Kind::mapping) return nullptr;
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

Node parse(std::string_view text) {
  Parser p(split_lines(text));
  return p.document();
}

}  // namespace scenforge::dsl::yaml
