#pragma once

#include <set>
#include <string>
#include <vector>

#include "scenforge/dsl/spec.hpp"

namespace scenforge::dsl::detail {

/// Paths whose values could not be read. Checks that depend on one of them
/// (or on anything beneath one) are skipped so a single defect is reported once.
class PathMask {
 public:
  void add(std::string path) { paths_.insert(std::move(path)); }
  bool blocked(const std::string& path) const;

 private:
  std::set<std::string> paths_;
};

std::vector<ValidationIssue> validate_masked(const ScenarioSpec& spec, const PathMask& mask);

}  // namespace scenforge::dsl::detail
