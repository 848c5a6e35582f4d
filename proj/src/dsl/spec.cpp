#include "scenforge/dsl/spec.hpp"

#include <algorithm>
#include <array>

namespace scenforge::dsl {
namespace {

constexpr std::array<int, 13> kRules{21453, 21460, 21461, 21800, 21801, 21802, 21803,
                                     21804, 22107, 22108, 22349, 22350, 22450};

}  // namespace

bool RoadNetwork::has_sign(TrafficSign sign) const {
  return std::find(traffic_signs.begin(), traffic_signs.end(), sign) != traffic_signs.end();
}

const ActorSpec* ActorSet::find(std::string_view actor_id) const {
  if (actor_id == kEgoId) return &ego;
  for (const auto& npc : npcs) {
    if (npc.actor_id == actor_id) return &npc;
  }
  return nullptr;
}

std::string effective_violating_actor(const ScenarioSpec& spec, const OracleEntry& entry) {
  if (entry.violating_actor) return *entry.violating_actor;
  if (!spec.actors.npcs.empty()) return spec.actors.npcs.front().actor_id;
  return std::string(kEgoId);
}

std::span<const int> supported_rule_ids() { return kRules; }

bool is_supported_rule(int rule_id) {
  return std::binary_search(kRules.begin(), kRules.end(), rule_id);
}

std::string_view issue_kind_name(IssueKind kind) {
  switch (kind) {
    case IssueKind::missing_section: return "missing_section";
    case IssueKind::invalid_enum: return "invalid_enum";
    case IssueKind::range_violation: return "range_violation";
    case IssueKind::inconsistent: return "inconsistent";
    case IssueKind::unknown_field: return "unknown_field";
  }
  return "?";
}

void sort_issues(std::vector<ValidationIssue>& issues) {
  std::stable_sort(issues.begin(), issues.end(),
                   [](const ValidationIssue& a, const ValidationIssue& b) { return a.path < b.path; });
}

}  // namespace scenforge::dsl
