#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Reader for the YAML 1.2 subset the scenario DSL is written in: block and
// flow mappings/sequences, plain/quoted/block scalars, comments. Anchors,
// aliases, tags, directives and multi-document streams are rejected rather
// than resolved, so a document means exactly what it says.
namespace scenforge::dsl::yaml {

struct Node {
  enum class Kind { null, scalar, mapping, sequence };

  Kind kind = Kind::null;
  std::string scalar;
  bool quoted = false;
  std::vector<std::pair<std::string, Node>> entries;  // document order
  std::vector<Node> items;
  int line = 0;

  bool is_null() const { return kind == Kind::null; }
  bool is_scalar() const { return kind == Kind::scalar; }
  bool is_mapping() const { return kind == Kind::mapping; }
  bool is_sequence() const { return kind == Kind::sequence; }

  /// Mapping lookup; nullptr when absent or when this is not a mapping.
  const Node* get(std::string_view key) const;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Parses one document. An empty or comment-only text yields a null node.
Node parse(std::string_view text);

}  // namespace scenforge::dsl::yaml
