#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"
#include "scenforge/dsl/document.hpp"
#include "scenforge/dsl/spec.hpp"

namespace scenforge::normalizer {

struct CanonicalToken {
  dsl::FieldKind field_kind = dsl::FieldKind::weather;
  std::string value;
  std::optional<int> hour;  // only for time values that name a clock time
};

/// Free-text synonyms per field kind, loaded from `kind.synonym=token[@hour]`
/// lines. Lookup keys are folded (case, surrounding space, and the
/// separators space/underscore/hyphen).
class SynonymTable {
 public:
  /// The table compiled into the binary from data/synonyms.txt.
  static const SynonymTable& builtin();
  /// Throws std::invalid_argument naming the line on malformed input.
  static SynonymTable parse(std::string_view text);
  static SynonymTable load(const std::filesystem::path& path);

  std::optional<CanonicalToken> lookup(dsl::FieldKind kind, std::string_view raw) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<dsl::FieldKind, std::string>, CanonicalToken> entries_;
};

/// Lowercases, trims, and unifies separators; the key form used for lookup.
std::string fold_key(std::string_view raw);

/// Canonical token for a free-text value, or nullopt (no_match).
std::optional<CanonicalToken> normalize_field(dsl::FieldKind kind, std::string_view raw,
                                              const SynonymTable& table = SynonymTable::builtin());

/// "10 m/s", "10 mps", "10 meters per second"; plain numbers too.
std::optional<double> parse_speed_text(std::string_view raw);

/// Parse options that route non-token values through the synonym table.
dsl::ParseOptions parse_options(const SynonymTable& table = SynonymTable::builtin());

enum class Provenance { explicit_value, normalized, defaulted };
std::string_view provenance_name(Provenance p);

inline constexpr double kDefaultSpeedMps = 10.0;
inline constexpr std::string_view kDefaultEgoModel = "vehicle.lincoln.mkz_2017";
inline constexpr std::string_view kTruckModel = "vehicle.carlamotors.european_hgv";
inline constexpr std::array<std::string_view, 5> kCarPool{
    "vehicle.nissan.patrol", "vehicle.tesla.model3", "vehicle.dodge.charger_2020", "vehicle.audi.tt",
    "vehicle.toyota.prius"};

struct NormalizedSpec {
  /// Fully resolved: no not_mentioned tokens, every speed, model and NPC
  /// heading present.
  dsl::ScenarioSpec spec;
  /// Field path -> how its value was obtained. Covers every leaf field.
  std::map<std::string, Provenance> provenance;
  std::uint64_t seed = 0;

  const dsl::ScenarioSpec& as_spec() const { return spec; }
  bool operator==(const NormalizedSpec&) const = default;
};

/// Actor index 0 is the ego; NPC i has index i + 1.
std::string resolve_actor_model(dsl::ActorType type, std::uint64_t seed, int actor_index);

/// Fills every omitted or not_mentioned field. `normalized_paths` lists
/// fields that the parser accepted through synonyms; they are tagged
/// normalized instead of explicit.
NormalizedSpec apply_defaults(const dsl::ScenarioSpec& spec, std::uint64_t seed,
                              const std::vector<std::string>& normalized_paths = {});

nlohmann::json to_json(const NormalizedSpec& n);
NormalizedSpec normalized_from_json(const nlohmann::json& j);

}  // namespace scenforge::normalizer
