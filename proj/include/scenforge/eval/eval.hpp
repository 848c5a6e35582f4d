#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scenforge/dsl/spec.hpp"
#include "scenforge/monitor/monitor.hpp"

namespace scenforge::eval {

struct FieldScore {
  int matched = 0;
  int total = 0;

  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(matched) / total; }
  FieldScore& operator+=(const FieldScore& o);
  bool operator==(const FieldScore&) const = default;
};

enum class Component { environment, road_network, actor, oracle };
inline constexpr std::array<Component, 4> kComponents{Component::environment, Component::road_network,
                                                      Component::actor, Component::oracle};
std::string_view component_name(Component c);

/// Field paths compared per component:
///   environment: weather, time_of_day (clock hour included)
///   road_network: road_type, number_of_ways, number_of_lanes, road_markers,
///     one presence flag per concrete traffic sign, speed_limit_value
///   actor: ego actor_type and behavior; per NPC actor_type, behavior and the
///     three position fields
///   oracle: rule_id and violation_type per entry
/// Unmatched actors and oracle entries count their fields as mismatches.
struct ComponentAccuracy {
  std::map<Component, FieldScore> scores;
  std::map<std::string, bool> per_field;

  const FieldScore& score(Component c) const { return scores.at(c); }
  double fraction(Component c) const { return score(c).fraction(); }
  FieldScore overall() const;
  bool operator==(const ComponentAccuracy&) const = default;
};

ComponentAccuracy compare_specs(const dsl::ScenarioSpec& candidate, const dsl::ScenarioSpec& golden);

/// Micro-average: matched and total fields are summed per component.
/// Throws std::invalid_argument on an empty list.
ComponentAccuracy aggregate_accuracy(const std::vector<ComponentAccuracy>& results);

/// component,matched,total,fraction rows, then overall.
std::string accuracy_csv(const ComponentAccuracy& a);
nlohmann::json to_json(const ComponentAccuracy& a);

struct CorpusCase {
  std::string case_id;
  dsl::ScenarioSpec candidate;
  dsl::ScenarioSpec golden;
};

/// Each subdirectory holding candidate.yaml and golden.yaml is one case,
/// ordered by directory name. Throws std::runtime_error naming a document
/// that does not parse cleanly.
std::vector<CorpusCase> load_corpus(const std::filesystem::path& dir);

inline constexpr int kMissingRating = -1;

struct RatingsMatrix {
  /// ratings[item][rater] is a category index or kMissingRating.
  std::vector<std::vector<int>> ratings;
  int categories = 2;

  /// w_jk = 1 - |j - k| / (C - 1)
  double weight(int j, int k) const;
};

enum class AgreementBand { poor, slight, fair, moderate, substantial, almost_perfect };
std::string_view band_name(AgreementBand b);
AgreementBand landis_koch_band(double kappa);

struct KappaResult {
  double kappa = 0.0;
  double observed = 0.0;  // weighted observed agreement
  double expected = 0.0;  // weighted chance agreement
  AgreementBand band = AgreementBand::poor;
};

class UndefinedKappa : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Weighted Fleiss kappa with linear weights. Throws std::invalid_argument on
/// invalid matrices and UndefinedKappa when chance agreement is 1.
KappaResult fleiss_kappa(const RatingsMatrix& m);

struct AgreementRow {
  std::string road_type;
  int observed = 0;
  int expected = 0;
  bool exact_match = false;
  std::vector<int> assessors;

  bool operator==(const AgreementRow&) const = default;
};

struct AgreementTable {
  std::vector<AgreementRow> rows;
};

struct ExpectedCount {
  std::string road_type;
  int expected = 0;
  std::vector<int> assessors;
};

/// Reads road_type,human_assessor_1,human_assessor_2,oracle_count rows.
std::vector<ExpectedCount> load_expected_counts(const std::filesystem::path& path);

/// Observed = distinct violated rules of the representative (first) report of
/// each road type. Rows follow `expected` order. Throws std::invalid_argument
/// when a road type has no reports.
AgreementTable compare_violation_counts(const std::map<std::string, std::vector<monitor::ViolationReport>>& reports,
                                        const std::vector<ExpectedCount>& expected);

std::string agreement_csv(const AgreementTable& t);

}  // namespace scenforge::eval
