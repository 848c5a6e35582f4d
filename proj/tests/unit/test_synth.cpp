#include <set>

#include "doctest.h"
#include "scenforge/common/digest.hpp"
#include "scenforge/normalizer/normalizer.hpp"
#include "scenforge/synth/junction.hpp"
#include "scenforge/synth/synth.hpp"
#include "support/spec_gen.hpp"

using namespace scenforge;
using namespace scenforge::synth;
using dsl::HeadingRelation;
using dsl::RoadType;
using dsl::TimeOfDay;
using dsl::Weather;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

dsl::ScenarioSpec base_spec(RoadType road, HeadingRelation heading) {
  dsl::ScenarioSpec s;
  s.scenario_id = "synth-case";
  s.environment = {Weather::cloudy, TimeOfDay::daytime, std::nullopt};
  s.road_network.road_type = road;
  s.road_network.number_of_ways = road == RoadType::intersection ? 4 : road == RoadType::t_intersection ? 3 : 2;
  s.road_network.number_of_lanes = 1;
  s.road_network.traffic_signs = {dsl::TrafficSign::not_mentioned};
  s.actors.ego.actor_id = "ego";
  s.actors.ego.speed_mps = 10.0;
  dsl::ActorSpec npc;
  npc.actor_id = "npc1";
  npc.speed_mps = 10.0;
  npc.position = dsl::PositionSpec{"ego", dsl::SpatialRelation::front, heading};
  s.actors.npcs.push_back(npc);
  s.oracle.push_back({21461, "unsafe_passing", "drives into the oncoming lane", std::string("npc1")});
  return s;
}

ScenarioTemplate build(const dsl::ScenarioSpec& s) { return build_template(normalizer::apply_defaults(s, 7)); }

}  // namespace

TEST_CASE("map_time") {
  CHECK(map_time(TimeOfDay::daytime) == 12);
  CHECK(map_time(TimeOfDay::nighttime) == 22);
  CHECK(map_time(TimeOfDay::not_mentioned) == 12);
}

TEST_CASE("map_weather table") {
  CHECK(map_weather(Weather::sunny, TimeOfDay::nighttime) == "ClearNight");
  CHECK(map_weather(Weather::cloudy, TimeOfDay::daytime) == "CloudyNoon");
  CHECK(map_weather(Weather::rainy, TimeOfDay::daytime) == "HardRainNoon");
  CHECK(map_weather(Weather::foggy, TimeOfDay::nighttime) == "FoggyNight");
  std::set<std::string> presets;
  for (const auto& w : dsl::vocabulary<Weather>()) {
    for (auto t : {TimeOfDay::daytime, TimeOfDay::nighttime}) {
      const auto preset = map_weather(w.value, t);
      CHECK_FALSE(preset.empty());
      CHECK(preset.ends_with(t == TimeOfDay::daytime ? "Noon" : "Night"));
      presets.insert(preset);
    }
  }
  CHECK(presets.size() >= 12);
}

TEST_CASE("select_map") {
  CHECK(select_map(RoadType::straight, 2).town == Town::Town02);
  CHECK_FALSE(select_map(RoadType::straight, 2).warning);
  CHECK(select_map(RoadType::straight, 4).town == Town::Town04);
  CHECK_FALSE(select_map(RoadType::straight, 4).warning);
  CHECK(select_map(RoadType::curve, 2).town == Town::Town02);
  CHECK_FALSE(select_map(RoadType::curve, 2).warning);
  for (int lanes = 1; lanes <= 16; ++lanes) {
    CHECK(select_map(RoadType::intersection, lanes).town == Town::Town05);
    CHECK(select_map(RoadType::t_intersection, lanes).town == Town::Town05);
  }
  CHECK(select_map(RoadType::straight, 3).town == Town::Town02);
  CHECK(select_map(RoadType::straight, 3).warning);
  CHECK(select_map(RoadType::straight, 6).town == Town::Town04);
  CHECK(select_map(RoadType::straight, 1).warning);
  CHECK(select_map(RoadType::curve, 4).warning);
}

TEST_CASE("widen_to_range") {
  const auto r = widen_to_range(10, RangeKind::speed);
  CHECK(r.low == 8.0);
  CHECK(r.high == 12.0);
  CHECK(r.unit == Unit::mps);
  const auto z = widen_to_range(0, RangeKind::speed);
  CHECK(z.low == 0.0);
  CHECK(z.high == 0.0);
  for (double base : {0.0, 3.0, 50.0}) {
    const auto d = widen_to_range(base, RangeKind::init_dist);
    CHECK(d.low == 15.0);
    CHECK(d.high == 20.0);
    CHECK(d.unit == Unit::m);
  }
}

TEST_CASE("configuration selection") {
  CHECK(build(base_spec(RoadType::straight, HeadingRelation::opposite_direction)).params.configuration ==
        Configuration::head_on);
  CHECK(build(base_spec(RoadType::straight, HeadingRelation::same_direction)).params.configuration ==
        Configuration::car_following);
  CHECK(build(base_spec(RoadType::curve, HeadingRelation::opposite_direction)).params.configuration ==
        Configuration::head_on);
  const auto j = build(base_spec(RoadType::intersection, HeadingRelation::from_left));
  CHECK(j.params.configuration == Configuration::junction_conflict);
  CHECK(j.params.approach == Approach::left);
  CHECK(j.params.town == Town::Town05);
  CHECK(build(base_spec(RoadType::intersection, HeadingRelation::from_right)).params.approach == Approach::right);

  auto solo = base_spec(RoadType::straight, HeadingRelation::opposite_direction);
  solo.actors.npcs.clear();
  solo.oracle.front().violating_actor = "ego";
  const auto t = build(solo);
  CHECK(t.params.configuration == Configuration::ego_only);
  CHECK(t.params.adversary_id.empty());
  CHECK(t.free_parameters.size() == 4);
}

TEST_CASE("compatibility errors name both tokens") {
  try {
    build(base_spec(RoadType::straight, HeadingRelation::from_left));
    FAIL("expected CompatibilityError");
  } catch (const CompatibilityError& e) {
    const std::string what = e.what();
    CHECK(what.find("from_left") != std::string::npos);
    CHECK(what.find("straight") != std::string::npos);
  }
  CHECK_THROWS_AS(build(base_spec(RoadType::curve, HeadingRelation::from_right)), CompatibilityError);
  CHECK_THROWS_AS(build(base_spec(RoadType::intersection, HeadingRelation::same_direction)), CompatibilityError);

  auto t_go = base_spec(RoadType::t_intersection, HeadingRelation::from_left);
  t_go.actors.npcs.front().behavior = dsl::Behavior::go_forward;
  CHECK_THROWS_AS(build(t_go), CompatibilityError);
  t_go.actors.npcs.front().behavior = dsl::Behavior::turn_left;
  CHECK_NOTHROW(build(t_go));
}

TEST_CASE("template parameters") {
  auto s = base_spec(RoadType::straight, HeadingRelation::opposite_direction);
  s.actors.npcs.front().speed_mps = 15.0;
  dsl::ActorSpec bg;
  bg.actor_id = "npc2";
  bg.speed_mps = 6.0;
  bg.position = dsl::PositionSpec{"ego", dsl::SpatialRelation::behind, HeadingRelation::same_direction};
  s.actors.npcs.push_back(bg);
  const auto t = build(s);
  CHECK(t.params.town == Town::Town02);
  CHECK(t.params.time_hour == 12);
  CHECK(t.params.weather_preset == "CloudyNoon");
  CHECK(t.free(kEgoSpeed).low == 8.0);
  CHECK(t.free(kNpcSpeed).low == doctest::Approx(12.0));
  CHECK(t.free(kNpcSpeed).high == doctest::Approx(18.0));
  CHECK(t.free(kEgoInitDist).low == 15.0);
  CHECK(t.free(kNpcInitDist).high == 20.0);
  std::vector<std::string> names;
  for (const auto& r : t.free_parameters) {
    names.push_back(r.name);
    CHECK(r.low <= r.high);
    CHECK_FALSE(t.fixed_parameters.count(r.name));
  }
  CHECK(names == std::vector<std::string>{"EGO_INIT_DIST", "NPC_INIT_DIST", "ego_speed", "npc_speed"});
  CHECK(t.fixed_parameters.at("speed.npc2") == 6.0);
  CHECK(t.fixed_parameters.at("speed_limit") == doctest::Approx(13.89));
  CHECK(t.actor("npc1").role == Role::adversary);
  CHECK(t.actor("npc2").role == Role::background);

  auto night = s;
  night.environment = {Weather::sunny, TimeOfDay::nighttime, std::nullopt};
  CHECK(build(night).params.time_hour == 22);
  CHECK(build(night).params.weather_preset == "ClearNight");
  night.environment.time_hour = 23;
  CHECK(build(night).params.time_hour == 23);

  auto wide = s;
  wide.road_network.number_of_lanes = 2;
  CHECK(build(wide).params.town == Town::Town04);
  CHECK(build(wide).params.lanes == 2);
}

TEST_CASE("adversary follows the oracle attribution") {
  auto s = base_spec(RoadType::straight, HeadingRelation::same_direction);
  dsl::ActorSpec second = s.actors.npcs.front();
  second.actor_id = "npc2";
  second.position->heading_relation = HeadingRelation::opposite_direction;
  s.actors.npcs.push_back(second);
  s.oracle.front().violating_actor = "npc2";
  const auto t = build(s);
  CHECK(t.params.adversary_id == "npc2");
  CHECK(t.params.configuration == Configuration::head_on);
}

TEST_CASE("render_scenic header contract and parse-back") {
  auto s = base_spec(RoadType::intersection, HeadingRelation::from_left);
  s.actors.npcs.front().behavior = dsl::Behavior::turn_left;
  const auto t = build(s);
  const auto prog = render_scenic(t);
  const auto& text = prog.source_text;
  CHECK(count_of(text, "Town05") == 1);
  CHECK(count_of(text, "CloudyNoon") == 1);
  CHECK(text.find("param carla_map = 'Town05'") != std::string::npos);
  CHECK(text.find("param weather = 'CloudyNoon'") != std::string::npos);
  CHECK(text.find("VerifaiRange(8, 12)") != std::string::npos);
  CHECK(text.find("# scenario_id: synth-case") != std::string::npos);
  CHECK(text.find(digest_hex(prog.content_digest)) != std::string::npos);
  CHECK(scenic_digest(text) == prog.content_digest);
  CHECK(render_scenic(t).content_digest == prog.content_digest);
  CHECK(render_scenic(t).source_text == text);

  const auto ranges = parse_verifai_ranges(text);
  REQUIRE(ranges.size() == t.free_parameters.size());
  for (const auto& r : t.free_parameters) {
    REQUIRE(ranges.count(r.name));
    CHECK(ranges.at(r.name).first == r.low);
    CHECK(ranges.at(r.name).second == r.high);
    CHECK(count_of(text, "param " + r.name + " = VerifaiRange(") == 1);
  }
  CHECK_THROWS_AS(parse_verifai_ranges(text + "x = VerifaiRange(1, 2)\n"), std::invalid_argument);
}

TEST_CASE("numbers render with six significant digits") {
  auto s = base_spec(RoadType::straight, HeadingRelation::opposite_direction);
  s.actors.ego.speed_mps = 13.3333333;
  const auto text = render_scenic(build(s)).source_text;
  CHECK(text.find("param ego_speed = VerifaiRange(10.6667, 16)") != std::string::npos);
  CHECK(text.find("param speed_limit = 13.89") != std::string::npos);
}

TEST_CASE("template JSON round trip and determinism over generated specs") {
  testing::SpecGenerator gen(99);
  int built = 0;
  for (int i = 0; i < 400; ++i) {
    const auto spec = gen.next();
    const auto n = normalizer::apply_defaults(spec, static_cast<std::uint64_t>(i));
    ScenarioTemplate t;
    try {
      t = build_template(n);
    } catch (const CompatibilityError&) {
      continue;
    }
    ++built;
    CHECK(template_from_json(nlohmann::json::parse(template_text(t))) == t);
    CHECK(template_digest(build_template(n)) == template_digest(t));
    const auto prog = render_scenic(t);
    CHECK(scenic_digest(prog.source_text) == prog.content_digest);
    CHECK(parse_verifai_ranges(prog.source_text).size() == 4);
    CHECK(count_of(prog.source_text, std::string(town_name(t.params.town))) == 1);
  }
  CHECK(built > 100);
}

TEST_CASE("junction legs") {
  CHECK(exit_leg(Leg::south, dsl::Behavior::go_forward) == Leg::north);
  CHECK(exit_leg(Leg::south, dsl::Behavior::turn_left) == Leg::west);
  CHECK(exit_leg(Leg::south, dsl::Behavior::turn_right) == Leg::east);
  CHECK(exit_leg(Leg::west, dsl::Behavior::turn_left) == Leg::north);
  CHECK(exit_leg(Leg::west, dsl::Behavior::turn_right) == Leg::south);
  CHECK(exit_leg(Leg::east, dsl::Behavior::turn_left) == Leg::south);
}
