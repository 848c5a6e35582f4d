#include <charconv>
#include <initializer_list>

#include "scenforge/common/digest.hpp"
#include "scenforge/dsl/document.hpp"
#include "scenforge/dsl/yaml_lite.hpp"
#include "validate_internal.hpp"

namespace scenforge::dsl {
namespace {

using yaml::Node;

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  // Integral floats such as "2.0" are accepted.
  const auto d = parse_number(s);
  if (d && *d == static_cast<double>(static_cast<long long>(*d))) return static_cast<long long>(*d);
  return std::nullopt;
}

template <typename E>
constexpr FieldKind kind_of() {
  if constexpr (std::is_same_v<E, Weather>) return FieldKind::weather;
  else if constexpr (std::is_same_v<E, TimeOfDay>) return FieldKind::time;
  else if constexpr (std::is_same_v<E, RoadType>) return FieldKind::road_type;
  else if constexpr (std::is_same_v<E, RoadMarker>) return FieldKind::marker;
  else if constexpr (std::is_same_v<E, TrafficSign>) return FieldKind::sign;
  else if constexpr (std::is_same_v<E, ActorType>) return FieldKind::actor_type;
  else if constexpr (std::is_same_v<E, Behavior>) return FieldKind::behavior;
  else if constexpr (std::is_same_v<E, SpatialRelation>) return FieldKind::spatial;
  else return FieldKind::heading;
}

class Reader {
 public:
  Reader(const ParseOptions& options) : opts_(options) {}

  ParseResult read(std::string_view source) {
    Node root;
    try {
      root = yaml::parse(source);
    } catch (const yaml::SyntaxError& e) {
      return ParseResult{std::nullopt, {{"/", IssueKind::inconsistent, std::string("malformed document: ") + e.what(), {}}}, {}};
    }
    if (!root.is_null() && !root.is_mapping()) {
      return ParseResult{std::nullopt,
                         {{"/", IssueKind::inconsistent, "malformed document: root must be a mapping", {}}}, {}};
    }

    ScenarioSpec spec;
    check_keys(root, "", {"scenario_id", "environment", "road_network", "actors", "oracle"});
    if (const Node* id = root.get("scenario_id"); id && !id->is_null()) {
      if (auto s = read_string(*id, "/scenario_id")) spec.scenario_id = *s;
    } else {
      spec.scenario_id = "scenario-" + digest_hex(fnv1a64(source));
    }
    if (const Node* env = section(root, "environment")) read_environment(*env, spec.environment);
    if (const Node* road = section(root, "road_network")) read_road(*road, spec.road_network);
    if (const Node* actors = section(root, "actors")) read_actors(*actors, spec.actors);
    if (const Node* oracle = root.get("oracle"); oracle && !oracle->is_null()) {
      read_oracle(*oracle, spec.oracle);
    } else {
      missing("/oracle", "oracle section is missing");
    }

    auto more = detail::validate_masked(spec, mask_);
    issues_.insert(issues_.end(), more.begin(), more.end());
    sort_issues(issues_);
    return ParseResult{std::move(spec), std::move(issues_), std::move(canonicalized_)};
  }

 private:
  const ParseOptions& opts_;
  std::vector<ValidationIssue> issues_;
  detail::PathMask mask_;
  std::vector<std::string> canonicalized_;

  void issue(const std::string& path, IssueKind kind, std::string message, std::vector<std::string> allowed = {}) {
    issues_.push_back({path, kind, std::move(message), std::move(allowed)});
    mask_.add(path);
  }

  void missing(const std::string& path, std::string message) { issue(path, IssueKind::missing_section, std::move(message)); }

  void check_keys(const Node& map, const std::string& base, std::initializer_list<std::string_view> allowed) {
    if (!opts_.strict) return;
    for (const auto& [key, _] : map.entries) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        issues_.push_back({base + "/" + key, IssueKind::unknown_field, "unknown field \"" + key + "\"", {}});
      }
    }
  }

  const Node* section(const Node& root, const std::string& key) {
    const std::string path = "/" + key;
    const Node* n = root.get(key);
    if (!n || n->is_null()) {
      missing(path, key + " section is missing");
      return nullptr;
    }
    if (!n->is_mapping()) {
      issue(path, IssueKind::inconsistent, key + " must be a mapping");
      return nullptr;
    }
    return n;
  }

  const Node* field(const Node& map, std::string_view key, const std::string& path, bool required) {
    const Node* n = map.get(key);
    if (!n || n->is_null()) {
      if (required) missing(path, std::string(key) + " is required");
      return nullptr;
    }
    return n;
  }

  std::optional<std::string> read_string(const Node& n, const std::string& path) {
    if (!n.is_scalar()) {
      issue(path, IssueKind::inconsistent, "expected a string");
      return std::nullopt;
    }
    return n.scalar;
  }

  template <typename E>
  std::optional<E> read_enum(const Node& n, const std::string& path, std::optional<int>* hour = nullptr) {
    if (!n.is_scalar()) {
      issue(path, IssueKind::inconsistent, "expected a " + std::string(vocabulary_name<E>()) + " token");
      return std::nullopt;
    }
    if (auto v = from_token<E>(n.scalar)) return v;
    if (opts_.canonicalize) {
      if (auto hit = opts_.canonicalize(kind_of<E>(), n.scalar)) {
        if (auto v = from_token<E>(hit->token)) {
          if (hour && hit->hour && !*hour) *hour = hit->hour;
          canonicalized_.push_back(path);
          return v;
        }
      }
    }
    issue(path, IssueKind::invalid_enum,
          "\"" + n.scalar + "\" is not a valid " + std::string(vocabulary_name<E>()) + " token", all_tokens<E>());
    return std::nullopt;
  }

  std::optional<int> read_int(const Node& n, const std::string& path) {
    if (n.is_scalar()) {
      if (auto v = parse_integer(n.scalar); v && *v >= -1000000 && *v <= 1000000) return static_cast<int>(*v);
    }
    issue(path, IssueKind::inconsistent, "expected an integer");
    return std::nullopt;
  }

  std::optional<double> read_speed(const Node& n, const std::string& path) {
    if (n.is_scalar()) {
      if (auto v = parse_number(n.scalar)) return v;
      if (opts_.parse_speed) {
        if (auto v = opts_.parse_speed(n.scalar)) {
          canonicalized_.push_back(path);
          return v;
        }
      }
    }
    issue(path, IssueKind::inconsistent, "expected a speed in m/s");
    return std::nullopt;
  }

  void read_environment(const Node& env, Environment& out) {
    check_keys(env, "/environment", {"weather", "time_of_day", "time_hour"});
    std::optional<int> hour;
    if (const Node* h = field(env, "time_hour", "/environment/time_hour", false)) hour = read_int(*h, "/environment/time_hour");
    if (const Node* w = field(env, "weather", "/environment/weather", true)) {
      if (auto v = read_enum<Weather>(*w, "/environment/weather")) out.weather = *v;
    }
    if (const Node* t = field(env, "time_of_day", "/environment/time_of_day", true)) {
      if (auto v = read_enum<TimeOfDay>(*t, "/environment/time_of_day", &hour)) out.time_of_day = *v;
    }
    out.time_hour = hour;
  }

  void read_road(const Node& road, RoadNetwork& out) {
    const std::string base = "/road_network";
    check_keys(road, base,
               {"road_type", "number_of_ways", "number_of_lanes", "road_markers", "traffic_signs", "speed_limit_value"});
    if (const Node* n = field(road, "road_type", base + "/road_type", true)) {
      if (auto v = read_enum<RoadType>(*n, base + "/road_type")) out.road_type = *v;
    }
    if (const Node* n = field(road, "number_of_ways", base + "/number_of_ways", true)) {
      if (auto v = read_int(*n, base + "/number_of_ways")) out.number_of_ways = *v;
    }
    if (const Node* n = field(road, "number_of_lanes", base + "/number_of_lanes", true)) {
      if (auto v = read_int(*n, base + "/number_of_lanes")) out.number_of_lanes = *v;
    }
    if (const Node* n = field(road, "road_markers", base + "/road_markers", true)) {
      if (auto v = read_enum<RoadMarker>(*n, base + "/road_markers")) out.road_markers = *v;
    }
    const std::string signs_path = base + "/traffic_signs";
    if (const Node* n = field(road, "traffic_signs", signs_path, true)) {
      if (n->is_scalar()) {
        if (auto v = read_enum<TrafficSign>(*n, signs_path + "/0")) out.traffic_signs.push_back(*v);
        else mask_.add(signs_path);
      } else if (n->is_sequence()) {
        bool all_ok = true;
        for (std::size_t i = 0; i < n->items.size(); ++i) {
          if (auto v = read_enum<TrafficSign>(n->items[i], signs_path + "/" + std::to_string(i))) {
            out.traffic_signs.push_back(*v);
          } else {
            all_ok = false;
          }
        }
        if (!all_ok) mask_.add(signs_path);
      } else {
        issue(signs_path, IssueKind::inconsistent, "traffic_signs must be a list");
      }
    }
    if (const Node* n = field(road, "speed_limit_value", base + "/speed_limit_value", false)) {
      out.speed_limit_value = read_speed(*n, base + "/speed_limit_value");
    }
  }

  void read_position(const Node& n, const std::string& path, std::optional<PositionSpec>& out) {
    if (!n.is_mapping()) {
      issue(path, IssueKind::inconsistent, "position must be a mapping");
      return;
    }
    check_keys(n, path, {"reference", "spatial_relation", "heading_relation"});
    PositionSpec pos;
    if (const Node* r = field(n, "reference", path + "/reference", false)) {
      if (auto s = read_string(*r, path + "/reference")) pos.reference = *s;
    }
    if (const Node* s = field(n, "spatial_relation", path + "/spatial_relation", true)) {
      if (auto v = read_enum<SpatialRelation>(*s, path + "/spatial_relation")) pos.spatial_relation = *v;
    }
    if (const Node* h = field(n, "heading_relation", path + "/heading_relation", false)) {
      pos.heading_relation = read_enum<HeadingRelation>(*h, path + "/heading_relation");
    }
    out = pos;
  }

  void read_actor(const Node& n, const std::string& path, ActorSpec& out, bool is_ego) {
    check_keys(n, path, {"actor_id", "actor_type", "behavior", "speed_mps", "model_id", "position"});
    if (const Node* id = field(n, "actor_id", path + "/actor_id", !is_ego)) {
      if (auto s = read_string(*id, path + "/actor_id")) out.actor_id = *s;
    } else if (is_ego) {
      out.actor_id = std::string(kEgoId);
    }
    if (const Node* t = field(n, "actor_type", path + "/actor_type", true)) {
      if (auto v = read_enum<ActorType>(*t, path + "/actor_type")) out.actor_type = *v;
    }
    if (const Node* b = field(n, "behavior", path + "/behavior", true)) {
      if (auto v = read_enum<Behavior>(*b, path + "/behavior")) out.behavior = *v;
    }
    if (const Node* s = field(n, "speed_mps", path + "/speed_mps", false)) out.speed_mps = read_speed(*s, path + "/speed_mps");
    if (const Node* m = field(n, "model_id", path + "/model_id", false)) out.model_id = read_string(*m, path + "/model_id");
    if (const Node* p = field(n, "position", path + "/position", !is_ego)) read_position(*p, path + "/position", out.position);
  }

  void read_actors(const Node& actors, ActorSet& out) {
    check_keys(actors, "/actors", {"ego", "npcs"});
    if (const Node* ego = field(actors, "ego", "/actors/ego", true)) {
      if (ego->is_mapping()) {
        read_actor(*ego, "/actors/ego", out.ego, true);
      } else {
        issue("/actors/ego", IssueKind::inconsistent, "ego must be a mapping");
      }
    }
    out.ego.actor_id = out.ego.actor_id.empty() ? std::string(kEgoId) : out.ego.actor_id;
    const Node* npcs = actors.get("npcs");
    if (!npcs || npcs->is_null()) return;
    if (!npcs->is_sequence()) {
      issue("/actors/npcs", IssueKind::inconsistent, "npcs must be a list");
      return;
    }
    for (std::size_t i = 0; i < npcs->items.size(); ++i) {
      const std::string path = "/actors/npcs/" + std::to_string(i);
      ActorSpec npc;
      if (npcs->items[i].is_mapping()) {
        read_actor(npcs->items[i], path, npc, false);
      } else {
        issue(path, IssueKind::inconsistent, "NPC entry must be a mapping");
      }
      out.npcs.push_back(std::move(npc));
    }
  }

  void read_oracle_entry(const Node& n, const std::string& path, OracleEntry& out) {
    std::vector<const std::pair<std::string, Node>*> rules;
    for (const auto& entry : n.entries) {
      const auto& key = entry.first;
      if (key.rfind("CVC_", 0) == 0) {
        rules.push_back(&entry);
      } else if (key != "description" && key != "violating_actor" && opts_.strict) {
        issues_.push_back({path + "/" + key, IssueKind::unknown_field, "unknown field \"" + key + "\"", {}});
      }
    }
    if (rules.empty()) {
      missing(path + "/rule_id", "oracle entry needs a CVC_<code>: <violation_type> key");
      mask_.add(path + "/violation_type");
    } else if (rules.size() > 1) {
      issue(path + "/rule_id", IssueKind::inconsistent, "oracle entry has more than one CVC_<code> key");
      mask_.add(path + "/violation_type");
    } else {
      const auto& [key, value] = *rules.front();
      const auto code = parse_integer(std::string_view(key).substr(4));
      if (!code || key.size() == 4 || key.find('.') != std::string::npos) {
        std::vector<std::string> allowed;
        for (int r : supported_rule_ids()) allowed.push_back(cvc_key(r));
        issue(path + "/rule_id", IssueKind::invalid_enum, "\"" + key + "\" is not a CVC rule key", allowed);
      } else {
        out.rule_id = static_cast<int>(*code);
      }
      if (value.is_null()) {
        missing(path + "/violation_type", "violation_type is required");
      } else if (auto s = read_string(value, path + "/violation_type")) {
        out.violation_type = *s;
      }
    }
    if (const Node* d = field(n, "description", path + "/description", true)) {
      if (auto s = read_string(*d, path + "/description")) out.description = *s;
    }
    if (const Node* a = field(n, "violating_actor", path + "/violating_actor", false)) {
      out.violating_actor = read_string(*a, path + "/violating_actor");
    }
  }

  void read_oracle(const Node& oracle, std::vector<OracleEntry>& out) {
    if (!oracle.is_sequence()) {
      issue("/oracle", IssueKind::inconsistent, "oracle must be a list");
      return;
    }
    for (std::size_t i = 0; i < oracle.items.size(); ++i) {
      const std::string path = "/oracle/" + std::to_string(i);
      OracleEntry entry;
      if (oracle.items[i].is_mapping()) {
        read_oracle_entry(oracle.items[i], path, entry);
      } else {
        issue(path, IssueKind::inconsistent, "oracle entry must be a mapping");
      }
      out.push_back(std::move(entry));
    }
  }
};

}  // namespace

ParseResult parse_dsl(std::string_view source_text, const ParseOptions& options) {
  return Reader(options).read(source_text);
}

}  // namespace scenforge::dsl
