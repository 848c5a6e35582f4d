#include "scenforge/normalizer/normalizer.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>
#include <stdexcept>

#include "scenforge/common/io.hpp"
#include "scenforge/common/splitmix.hpp"
#include "scenforge/dsl/spec_json.hpp"
#include "scenforge/embedded/synonyms.hpp"

namespace scenforge::normalizer {
namespace {

using dsl::FieldKind;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<int> parse_small_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// "7 am", "12 pm", "7:30 pm", "21:30". Bare numbers are not clock times.
std::optional<int> clock_hour(std::string_view folded) {
  static const std::regex re(R"(^(\d{1,2})(?::(\d{2}))?\s*(am|pm|a\.m\.|p\.m\.)?$)");
  std::cmatch m;
  const std::string s(folded);
  if (!std::regex_match(s.c_str(), m, re)) return std::nullopt;
  const bool has_minutes = m[2].matched;
  const bool has_meridiem = m[3].matched;
  if (!has_minutes && !has_meridiem) return std::nullopt;
  int hour = std::stoi(m[1].str());
  if (has_minutes && std::stoi(m[2].str()) > 59) return std::nullopt;
  if (has_meridiem) {
    if (hour < 1 || hour > 12) return std::nullopt;
    const bool pm = m[3].str()[0] == 'p';
    hour = hour % 12 + (pm ? 12 : 0);
  } else if (hour > 23) {
    return std::nullopt;
  }
  return hour;
}

bool in_vocabulary(FieldKind kind, const std::string& token) {
  const auto tokens = dsl::field_kind_tokens(kind);
  return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
}

}  // namespace

std::string fold_key(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(raw)) {
    if (c == ' ' || c == '_' || c == '-' || c == '\t') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

SynonymTable SynonymTable::parse(std::string_view text) {
  SynonymTable table;
  int lineno = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    if (line.empty() || line.front() == '#') continue;

    const auto fail = [&](const std::string& why) {
      throw std::invalid_argument("synonym table line " + std::to_string(lineno) + ": " + why);
    };
    const auto eq = line.find('=');
    const auto dot = line.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) fail("expected kind.synonym=token");
    const auto kind = dsl::field_kind_from_name(trim(line.substr(0, dot)));
    if (!kind) fail("unknown field kind '" + std::string(line.substr(0, dot)) + "'");
    const std::string key = fold_key(line.substr(dot + 1, eq - dot - 1));
    if (key.empty()) fail("empty synonym");

    std::string_view target = trim(line.substr(eq + 1));
    CanonicalToken tok{*kind, {}, std::nullopt};
    if (const auto at = target.find('@'); at != std::string_view::npos) {
      const auto hour = parse_small_int(trim(target.substr(at + 1)));
      if (!hour || *hour < 0 || *hour > 23 || *kind != FieldKind::time) fail("bad hour annotation");
      tok.hour = hour;
      target = trim(target.substr(0, at));
    }
    tok.value = std::string(target);
    if (!in_vocabulary(*kind, tok.value)) fail("'" + tok.value + "' is not a " + std::string(dsl::field_kind_name(*kind)) + " token");
    if (!table.entries_.emplace(std::make_pair(*kind, key), tok).second) fail("duplicate synonym '" + key + "'");
  }
  return table;
}

const SynonymTable& SynonymTable::builtin() {
  static const SynonymTable table = parse(embedded::kSynonymsTxt);
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

std::optional<CanonicalToken> SynonymTable::lookup(FieldKind kind, std::string_view raw) const {
  const std::string key = fold_key(raw);
  if (key.empty()) return std::nullopt;
  for (const auto& token : dsl::field_kind_tokens(kind)) {
    if (fold_key(token) == key) return CanonicalToken{kind, token, std::nullopt};
  }
  if (auto it = entries_.find({kind, key}); it != entries_.end()) return it->second;
  if (kind == FieldKind::time) {
    if (auto hour = clock_hour(key)) {
      return CanonicalToken{kind, (*hour >= 6 && *hour < 18) ? "daytime" : "nighttime", hour};
    }
  }
  return std::nullopt;
}

std::optional<CanonicalToken> normalize_field(FieldKind kind, std::string_view raw, const SynonymTable& table) {
  return table.lookup(kind, raw);
}

std::optional<double> parse_speed_text(std::string_view raw) {
  static const std::regex re(R"(^([0-9]+(?:\.[0-9]+)?)\s*(m/s|mps|meters? per second|metres? per second)?$)");
  const std::string s(trim(raw));
  std::smatch m;
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (!std::regex_match(lower, m, re)) return std::nullopt;
  return std::stod(m[1].str());
}

dsl::ParseOptions parse_options(const SynonymTable& table) {
  dsl::ParseOptions opts;
  opts.canonicalize = [&table](FieldKind kind, std::string_view raw) -> std::optional<dsl::CanonicalHit> {
    if (auto tok = table.lookup(kind, raw)) return dsl::CanonicalHit{tok->value, tok->hour};
    return std::nullopt;
  };
  opts.parse_speed = parse_speed_text;
  return opts;
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::explicit_value: return "explicit";
    case Provenance::normalized: return "normalized";
    case Provenance::defaulted: return "defaulted";
  }
  return "?";
}

std::string resolve_actor_model(dsl::ActorType type, std::uint64_t seed, int actor_index) {
  if (type == dsl::ActorType::truck) return std::string(kTruckModel);
  SplitMix64 rng(seed ^ splitmix_mix(static_cast<std::uint64_t>(actor_index)));
  return std::string(kCarPool[rng.next() % kCarPool.size()]);
}

NormalizedSpec apply_defaults(const dsl::ScenarioSpec& input, std::uint64_t seed,
                              const std::vector<std::string>& normalized_paths) {
  using namespace dsl;
  NormalizedSpec out;
  out.spec = input;
  out.seed = seed;
  auto& s = out.spec;
  auto& prov = out.provenance;

  const auto given = [&](const std::string& path) {
    const bool norm = std::find(normalized_paths.begin(), normalized_paths.end(), path) != normalized_paths.end();
    prov[path] = norm ? Provenance::normalized : Provenance::explicit_value;
  };
  const auto defaulted = [&](const std::string& path) { prov[path] = Provenance::defaulted; };

  given("/scenario_id");
  if (s.environment.weather == Weather::not_mentioned) {
    s.environment.weather = Weather::sunny;
    defaulted("/environment/weather");
  } else {
    given("/environment/weather");
  }
  if (s.environment.time_of_day == TimeOfDay::not_mentioned) {
    s.environment.time_of_day = TimeOfDay::daytime;
    defaulted("/environment/time_of_day");
  } else {
    given("/environment/time_of_day");
  }
  if (s.environment.time_hour) {
    const bool from_synonym = prov["/environment/time_of_day"] == Provenance::normalized;
    prov["/environment/time_hour"] = from_synonym ? Provenance::normalized : Provenance::explicit_value;
  }

  auto& road = s.road_network;
  given("/road_network/road_type");
  given("/road_network/number_of_ways");
  given("/road_network/number_of_lanes");
  if (road.road_markers == RoadMarker::not_mentioned) {
    road.road_markers = RoadMarker::broken_line;
    defaulted("/road_network/road_markers");
  } else {
    given("/road_network/road_markers");
  }
  if (road.traffic_signs == std::vector<TrafficSign>{TrafficSign::not_mentioned}) {
    road.traffic_signs.clear();
    defaulted("/road_network/traffic_signs");
  } else {
    given("/road_network/traffic_signs");
  }
  if (road.speed_limit_value) given("/road_network/speed_limit_value");

  const auto fill_actor = [&](ActorSpec& a, const std::string& base, int index, bool is_ego) {
    given(base + "/actor_type");
    given(base + "/behavior");
    if (!is_ego) given(base + "/actor_id");
    if (a.speed_mps) {
      given(base + "/speed_mps");
    } else {
      a.speed_mps = kDefaultSpeedMps;
      defaulted(base + "/speed_mps");
    }
    if (a.model_id && !a.model_id->empty()) {
      given(base + "/model_id");
    } else {
      if (is_ego) {
        a.model_id = a.actor_type == ActorType::truck ? std::string(kTruckModel) : std::string(kDefaultEgoModel);
      } else {
        a.model_id = resolve_actor_model(a.actor_type, seed, index);
      }
      defaulted(base + "/model_id");
    }
    if (a.position) {
      given(base + "/position/reference");
      given(base + "/position/spatial_relation");
      if (a.position->heading_relation) {
        given(base + "/position/heading_relation");
      } else {
        a.position->heading_relation = HeadingRelation::opposite_direction;
        defaulted(base + "/position/heading_relation");
      }
    }
  };
  fill_actor(s.actors.ego, "/actors/ego", 0, true);
  for (std::size_t i = 0; i < s.actors.npcs.size(); ++i) {
    fill_actor(s.actors.npcs[i], "/actors/npcs/" + std::to_string(i), static_cast<int>(i) + 1, false);
  }

  for (std::size_t i = 0; i < s.oracle.size(); ++i) {
    auto& e = s.oracle[i];
    const std::string base = "/oracle/" + std::to_string(i);
    given(base + "/rule_id");
    given(base + "/violation_type");
    given(base + "/description");
    if (e.violating_actor) {
      given(base + "/violating_actor");
    } else {
      e.violating_actor = effective_violating_actor(s, e);
      defaulted(base + "/violating_actor");
    }
  }
  return out;
}

nlohmann::json to_json(const NormalizedSpec& n) {
  nlohmann::json j;
  j["spec"] = dsl::to_json(n.spec);
  j["seed"] = n.seed;
  nlohmann::json prov = nlohmann::json::object();
  for (const auto& [path, p] : n.provenance) prov[path] = provenance_name(p);
  j["provenance"] = prov;
  return j;
}

NormalizedSpec normalized_from_json(const nlohmann::json& j) {
  NormalizedSpec n;
  try {
    n.spec = dsl::spec_from_json(j.at("spec"));
    n.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [path, value] : j.at("provenance").items()) {
      const auto name = value.get<std::string>();
      if (name == "explicit") n.provenance[path] = Provenance::explicit_value;
      else if (name == "normalized") n.provenance[path] = Provenance::normalized;
      else if (name == "defaulted") n.provenance[path] = Provenance::defaulted;
      else throw std::invalid_argument("unknown provenance '" + name + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed normalized spec JSON: ") + e.what());
  }
  return n;
}

}  // namespace scenforge::normalizer
