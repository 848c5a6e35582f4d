#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenforge/dsl/spec.hpp"
#include "scenforge/sim/sim.hpp"

namespace scenforge::monitor {

enum class Category { right_of_way, signal, stop_sign, speed, overtaking, lane_maneuver, headway, lane_keeping };
std::string_view category_name(Category c);

struct RuleSpec {
  int rule_id = 0;
  Category category = Category::speed;
  std::map<std::string, double> parameters;
};

/// The thirteen evaluable vehicle-code sections, in ascending order.
const std::vector<RuleSpec>& registry();
const RuleSpec& rule(int rule_id);

class RegistryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Violation {
  int rule_id = 0;
  std::string actor_id;
  double t_start = 0.0;
  double t_end = 0.0;
  std::map<std::string, double> evidence;

  bool operator==(const Violation&) const = default;
};

enum class Outcome { rule_violation, collision, both, clean };
std::string_view outcome_name(Outcome o);

struct ViolationReport {
  std::string scenario_id;
  std::uint64_t instance_seed = 0;
  std::vector<Violation> violations;
  std::vector<sim::CollisionEvent> collisions;
  Outcome outcome = Outcome::clean;
  bool targeted_hit = false;

  bool operator==(const ViolationReport&) const = default;
  std::vector<int> distinct_rules() const;
};

std::vector<Violation> evaluate_rule(const RuleSpec& rule, const sim::Trace& trace, const sim::RoadGeometry& geometry);
std::vector<Violation> evaluate_rule(int rule_id, const sim::Trace& trace, const sim::RoadGeometry& geometry);

/// Every registry rule plus collision detection.
ViolationReport monitor(const sim::Trace& trace, const std::vector<dsl::OracleEntry>& oracle,
                        const sim::RoadGeometry& geometry);

/// Oracle entries without a violating_actor are attributed to the first
/// NPC, or to the ego when there is none.
bool targeted_hit(const std::vector<Violation>& violations, const std::vector<dsl::OracleEntry>& oracle,
                  const sim::RoadGeometry& geometry);

nlohmann::json to_json(const ViolationReport& report);
ViolationReport report_from_json(const nlohmann::json& j);
std::string report_text(const ViolationReport& report);

/// Maps rule ids to reporting groups. The default maps each rule to its own
/// "CVC_<id>" group.
struct GroupingConfig {
  std::map<int, std::string> groups;

  static GroupingConfig identity();
  static GroupingConfig from_json(const nlohmann::json& j);
  std::string group_of(int rule_id) const;
};

std::map<std::string, int> grouped_counts(const ViolationReport& report, const GroupingConfig& config);

std::string summary_csv_header();
std::string summary_csv_row(const ViolationReport& report);

}  // namespace scenforge::monitor
