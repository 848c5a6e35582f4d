#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scenforge/dsl/spec.hpp"

namespace scenforge::dsl {

/// Result of canonicalizing a free-text enum value.
struct CanonicalHit {
  std::string token;
  std::optional<int> hour;  // clock hour carried by time values like "12 pm"
};

using TokenCanonicalizer = std::function<std::optional<CanonicalHit>(FieldKind, std::string_view)>;
using SpeedTextParser = std::function<std::optional<double>(std::string_view)>;

struct ParseOptions {
  /// Unknown keys are unknown_field issues when set.
  bool strict = true;
  /// Consulted only for values that are not already exact vocabulary tokens.
  TokenCanonicalizer canonicalize;
  /// Consulted for speed values that are not plain numbers ("10 m/s").
  SpeedTextParser parse_speed;
};

struct ParseResult {
  /// Present whenever the document was structurally readable, even if
  /// cross-field validation reported issues.
  std::optional<ScenarioSpec> spec;
  /// Every structural and validation issue, sorted by path.
  std::vector<ValidationIssue> issues;
  /// Paths whose value was accepted through the canonicalizer or speed-text
  /// hook rather than written as an exact token or number.
  std::vector<std::string> canonicalized_paths;

  bool ok() const { return spec.has_value() && issues.empty(); }
};

ParseResult parse_dsl(std::string_view source_text, const ParseOptions& options = {});

/// Canonical document text: fixed key order, 2-space indent, LF endings.
std::string serialize_dsl(const ScenarioSpec& spec);

/// Cross-field and range checks; empty iff the spec satisfies every invariant.
std::vector<ValidationIssue> validate_spec(const ScenarioSpec& spec);

/// "CVC_21460" style key for a rule id.
std::string cvc_key(int rule_id);

}  // namespace scenforge::dsl
