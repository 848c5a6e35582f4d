#include "doctest.h"
#include "scenforge/dsl/document.hpp"
#include "scenforge/normalizer/normalizer.hpp"
#include "support/spec_gen.hpp"

using namespace scenforge;
using namespace scenforge::normalizer;
using dsl::FieldKind;

namespace {

dsl::ScenarioSpec minimal_spec() {
  dsl::ScenarioSpec s;
  s.scenario_id = "n1";
  s.environment = {dsl::Weather::not_mentioned, dsl::TimeOfDay::not_mentioned, std::nullopt};
  s.road_network.road_type = dsl::RoadType::straight;
  s.road_network.number_of_ways = 2;
  s.road_network.number_of_lanes = 1;
  s.road_network.traffic_signs = {dsl::TrafficSign::not_mentioned};
  s.actors.ego.actor_id = "ego";
  dsl::ActorSpec npc;
  npc.actor_id = "npc1";
  npc.position = dsl::PositionSpec{"ego", dsl::SpatialRelation::front, std::nullopt};
  s.actors.npcs.push_back(npc);
  dsl::ActorSpec truck = npc;
  truck.actor_id = "npc2";
  truck.actor_type = dsl::ActorType::truck;
  s.actors.npcs.push_back(truck);
  s.oracle.push_back({21461, "unsafe_passing", "passes into oncoming traffic", std::nullopt});
  return s;
}

}  // namespace

TEST_CASE("normalize_field examples") {
  const auto noon = normalize_field(FieldKind::time, "12 pm");
  REQUIRE(noon);
  CHECK(noon->value == "daytime");
  CHECK(noon->hour == 12);
  CHECK(normalize_field(FieldKind::heading, "opposite direction")->value == "opposite_direction");
  CHECK(normalize_field(FieldKind::weather, "  SUNNY ")->value == "sunny");
  CHECK(normalize_field(FieldKind::time, "Day")->value == "daytime");
  CHECK_FALSE(normalize_field(FieldKind::weather, "plasma"));
  CHECK_FALSE(normalize_field(FieldKind::time, "12"));
}

TEST_CASE("clock times") {
  CHECK(normalize_field(FieldKind::time, "7 am")->hour == 7);
  CHECK(normalize_field(FieldKind::time, "7 am")->value == "daytime");
  CHECK(normalize_field(FieldKind::time, "9:45 PM")->hour == 21);
  CHECK(normalize_field(FieldKind::time, "9:45 PM")->value == "nighttime");
  CHECK(normalize_field(FieldKind::time, "12 am")->hour == 0);
  CHECK(normalize_field(FieldKind::time, "17:59")->value == "daytime");
  CHECK(normalize_field(FieldKind::time, "18:00")->value == "nighttime");
  CHECK_FALSE(normalize_field(FieldKind::time, "25:00"));
  CHECK_FALSE(normalize_field(FieldKind::time, "13 pm"));
}

TEST_CASE("every vocabulary token normalizes to itself") {
  for (auto kind : {FieldKind::weather, FieldKind::time, FieldKind::behavior, FieldKind::heading, FieldKind::spatial,
                    FieldKind::marker, FieldKind::sign, FieldKind::actor_type, FieldKind::road_type}) {
    for (const auto& token : dsl::field_kind_tokens(kind)) {
      const auto hit = normalize_field(kind, token);
      REQUIRE(hit);
      CHECK(hit->value == token);
    }
  }
}

TEST_CASE("every table entry resolves to a vocabulary token") {
  const auto& table = SynonymTable::builtin();
  CHECK(table.size() > 50);
  // Loading the shipped file directly gives the same table as the embedded copy.
  const auto loaded = SynonymTable::load(std::string(SCENFORGE_DATA_DIR) + "/synonyms.txt");
  CHECK(loaded.size() == table.size());
}

TEST_CASE("synonym table parse errors") {
  CHECK_THROWS_AS(SynonymTable::parse("weather.x=plasma\n"), std::invalid_argument);
  CHECK_THROWS_AS(SynonymTable::parse("colour.x=red\n"), std::invalid_argument);
  CHECK_THROWS_AS(SynonymTable::parse("weather.x sunny\n"), std::invalid_argument);
  CHECK_THROWS_AS(SynonymTable::parse("weather.x=sunny@3\n"), std::invalid_argument);
  CHECK_THROWS_AS(SynonymTable::parse("time.a=daytime\ntime.A=nighttime\n"), std::invalid_argument);
  const auto t = SynonymTable::parse("# c\n\ntime.brunch=daytime@11\n");
  CHECK(t.lookup(FieldKind::time, "Brunch")->hour == 11);
}

TEST_CASE("speed text") {
  CHECK(parse_speed_text("10 m/s") == 10.0);
  CHECK(parse_speed_text("12.5m/s") == 12.5);
  CHECK(parse_speed_text("8 meters per second") == 8.0);
  CHECK_FALSE(parse_speed_text("30 mph"));
  CHECK_FALSE(parse_speed_text("fast"));
}

TEST_CASE("apply_defaults injects the fallback values") {
  const auto n = apply_defaults(minimal_spec(), 42);
  const auto& s = n.spec;
  CHECK(s.actors.ego.speed_mps == 10.0);
  CHECK(n.provenance.at("/actors/ego/speed_mps") == Provenance::defaulted);
  CHECK(s.actors.ego.model_id == std::optional<std::string>("vehicle.lincoln.mkz_2017"));
  CHECK(s.actors.npcs[0].position->heading_relation == dsl::HeadingRelation::opposite_direction);
  CHECK(n.provenance.at("/actors/npcs/0/position/heading_relation") == Provenance::defaulted);
  CHECK(s.actors.npcs[0].speed_mps == 10.0);
  CHECK(s.actors.npcs[1].model_id == std::optional<std::string>("vehicle.carlamotors.european_hgv"));
  CHECK(s.environment.weather == dsl::Weather::sunny);
  CHECK(s.environment.time_of_day == dsl::TimeOfDay::daytime);
  CHECK(s.road_network.road_markers == dsl::RoadMarker::broken_line);
  CHECK(s.road_network.traffic_signs.empty());
  CHECK(s.oracle[0].violating_actor == std::optional<std::string>("npc1"));
  CHECK(dsl::validate_spec(s).empty());
}

TEST_CASE("truck ego gets the truck model") {
  auto s = minimal_spec();
  s.actors.ego.actor_type = dsl::ActorType::truck;
  CHECK(apply_defaults(s, 0).spec.actors.ego.model_id == std::optional<std::string>(std::string(kTruckModel)));
}

TEST_CASE("resolve_actor_model") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, ~0ULL}) {
    for (int idx = 0; idx < 6; ++idx) {
      CHECK(resolve_actor_model(dsl::ActorType::truck, seed, idx) == kTruckModel);
      const auto a = resolve_actor_model(dsl::ActorType::car, seed, idx);
      CHECK(a == resolve_actor_model(dsl::ActorType::car, seed, idx));
      CHECK(std::find(kCarPool.begin(), kCarPool.end(), a) != kCarPool.end());
    }
  }
  // The stream covers the whole pool.
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) seen.insert(resolve_actor_model(dsl::ActorType::car, seed, 1));
  CHECK(seen.size() == kCarPool.size());
}

TEST_CASE("idempotence, explicit preservation, determinism") {
  scenforge::testing::SpecGenerator gen(11);
  for (int i = 0; i < 500; ++i) {
    const auto s = gen.next();
    const std::uint64_t seed = static_cast<std::uint64_t>(i) * 7919;
    const auto once = apply_defaults(s, seed);
    const auto twice = apply_defaults(once.as_spec(), seed);
    CHECK(twice.spec == once.spec);
    CHECK(dsl::serialize_dsl(apply_defaults(s, seed).spec) == dsl::serialize_dsl(once.spec));
    CHECK(to_json(once).dump() == to_json(apply_defaults(s, seed)).dump());
    if (s.actors.ego.speed_mps) CHECK(once.spec.actors.ego.speed_mps == s.actors.ego.speed_mps);
    if (s.actors.ego.model_id) CHECK(once.spec.actors.ego.model_id == s.actors.ego.model_id);
    for (std::size_t k = 0; k < s.actors.npcs.size(); ++k) {
      if (s.actors.npcs[k].position->heading_relation) {
        CHECK(once.spec.actors.npcs[k].position->heading_relation == s.actors.npcs[k].position->heading_relation);
      }
    }
    if (s.environment.weather != dsl::Weather::not_mentioned) CHECK(once.spec.environment.weather == s.environment.weather);
    for (const auto& [path, p] : once.provenance) {
      if (p == Provenance::explicit_value) CHECK(path.front() == '/');
    }
    CHECK(once.spec.environment.weather != dsl::Weather::not_mentioned);
    CHECK(once.spec.environment.time_of_day != dsl::TimeOfDay::not_mentioned);
    CHECK(once.spec.road_network.road_markers != dsl::RoadMarker::not_mentioned);
    CHECK(normalized_from_json(to_json(once)) == once);
  }
}

TEST_CASE("synonyms through the parser mark provenance normalized") {
  const std::string doc = R"(scenario_id: syn
environment:
  weather: Rain
  time_of_day: 12 pm
road_network:
  road_type: T-intersection
  number_of_ways: 3
  number_of_lanes: 1
  road_markers: not_mentioned
  traffic_signs: [Stop]
actors:
  ego:
    actor_type: sedan
    behavior: Going straight
    speed_mps: 10 m/s
  npcs: []
oracle:
  - CVC_22450: stop_sign_violation
    description: "ego rolls through the stop sign"
    violating_actor: ego
)";
  CHECK_FALSE(dsl::parse_dsl(doc).ok());
  const auto r = dsl::parse_dsl(doc, parse_options());
  REQUIRE(r.ok());
  const auto n = apply_defaults(*r.spec, 0, r.canonicalized_paths);
  CHECK(n.spec.environment.weather == dsl::Weather::rainy);
  CHECK(n.spec.environment.time_hour == 12);
  CHECK(n.spec.road_network.road_type == dsl::RoadType::t_intersection);
  CHECK(n.provenance.at("/environment/weather") == Provenance::normalized);
  CHECK(n.provenance.at("/environment/time_hour") == Provenance::normalized);
  CHECK(n.provenance.at("/actors/ego/speed_mps") == Provenance::normalized);
  CHECK(n.provenance.at("/road_network/number_of_ways") == Provenance::explicit_value);
  CHECK(n.provenance.at("/road_network/road_markers") == Provenance::defaulted);
}
