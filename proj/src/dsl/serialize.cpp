#include <array>
#include <cstdio>
#include <sstream>

#include "scenforge/common/number_format.hpp"
#include "scenforge/dsl/document.hpp"

namespace scenforge::dsl {
namespace {

bool is_plain_safe(std::string_view s) {
  if (s.empty()) return false;
  const auto ident_start = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  const auto ident_char = [&](char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '.' || c == '-'; };
  if (!ident_start(s.front())) return false;
  for (char c : s) {
    if (!ident_char(c)) return false;
  }
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  static constexpr std::array<std::string_view, 8> kSpecial{"null", "true", "false", "yes", "no", "on", "off", "y"};
  for (auto w : kSpecial) {
    if (lower == w) return false;
  }
  return lower != "n";
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(c)));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out += '"';
  return out;
}

std::string scalar(std::string_view s) { return is_plain_safe(s) ? std::string(s) : quote(s); }

class Writer {
 public:
  std::string str() const { return out_.str(); }

  void line(int indent, std::string_view text) { out_ << std::string(static_cast<std::size_t>(indent), ' ') << text << '\n'; }

  void kv(int indent, std::string_view key, std::string_view value) {
    out_ << std::string(static_cast<std::size_t>(indent), ' ') << key << ": " << value << '\n';
  }

 private:
  std::ostringstream out_;
};

void write_actor(Writer& w, int indent, const ActorSpec& a, bool is_ego, bool first_line_dash) {
  // The first key of a list item sits after "- ".
  int key_indent = indent;
  auto emit = [&](std::string_view key, const std::string& value) {
    if (first_line_dash) {
      w.kv(indent - 2, std::string("- ") + std::string(key), value);
      first_line_dash = false;
    } else {
      w.kv(key_indent, key, value);
    }
  };
  if (!is_ego) emit("actor_id", scalar(a.actor_id));
  emit("actor_type", std::string(to_token(a.actor_type)));
  emit("behavior", std::string(to_token(a.behavior)));
  if (a.speed_mps) emit("speed_mps", format_shortest(*a.speed_mps));
  if (a.model_id) emit("model_id", scalar(*a.model_id));
  if (a.position) {
    w.line(key_indent, "position:");
    w.kv(key_indent + 2, "reference", scalar(a.position->reference));
    w.kv(key_indent + 2, "spatial_relation", std::string(to_token(a.position->spatial_relation)));
    if (a.position->heading_relation) {
      w.kv(key_indent + 2, "heading_relation", std::string(to_token(*a.position->heading_relation)));
    }
  }
}

}  // namespace

std::string serialize_dsl(const ScenarioSpec& spec) {
  Writer w;
  w.kv(0, "scenario_id", scalar(spec.scenario_id));

  const auto& env = spec.environment;
  w.line(0, "environment:");
  w.kv(2, "weather", std::string(to_token(env.weather)));
  w.kv(2, "time_of_day", std::string(to_token(env.time_of_day)));
  if (env.time_hour) w.kv(2, "time_hour", std::to_string(*env.time_hour));

  const auto& road = spec.road_network;
  w.line(0, "road_network:");
  w.kv(2, "road_type", std::string(to_token(road.road_type)));
  w.kv(2, "number_of_ways", std::to_string(road.number_of_ways));
  w.kv(2, "number_of_lanes", std::to_string(road.number_of_lanes));
  w.kv(2, "road_markers", std::string(to_token(road.road_markers)));
  if (road.traffic_signs.empty()) {
    w.kv(2, "traffic_signs", "[]");
  } else {
    w.line(2, "traffic_signs:");
    for (auto s : road.traffic_signs) w.line(4, "- " + std::string(to_token(s)));
  }
  if (road.speed_limit_value) w.kv(2, "speed_limit_value", format_shortest(*road.speed_limit_value));

  w.line(0, "actors:");
  w.line(2, "ego:");
  write_actor(w, 4, spec.actors.ego, true, false);
  if (spec.actors.npcs.empty()) {
    w.kv(2, "npcs", "[]");
  } else {
    w.line(2, "npcs:");
    for (const auto& npc : spec.actors.npcs) write_actor(w, 6, npc, false, true);
  }

  if (spec.oracle.empty()) {
    w.kv(0, "oracle", "[]");
  } else {
    w.line(0, "oracle:");
    for (const auto& e : spec.oracle) {
      w.kv(2, "- " + cvc_key(e.rule_id), scalar(e.violation_type));
      w.kv(4, "description", quote(e.description));
      if (e.violating_actor) w.kv(4, "violating_actor", scalar(*e.violating_actor));
    }
  }
  return w.str();
}

}  // namespace scenforge::dsl
