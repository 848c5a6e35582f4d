#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "scenforge/common/digest.hpp"
#include "scenforge/common/io.hpp"
#include "scenforge/dsl/document.hpp"
#include "scenforge/eval/eval.hpp"
#include "scenforge/pipeline/pipeline.hpp"
#include "scenforge/sim/obb.hpp"
#include "support/spec_gen.hpp"

using namespace scenforge;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SCENFORGE_DATA_DIR;
const fs::path kRoadTypeFixtures = kData / "fixtures" / "road_types";
const fs::path kExtraction = kData / "fixtures" / "extraction";
const std::vector<std::string> kRoadTypes{"straight_1", "straight_2", "intersection_1",
                                          "intersection_2", "t_intersection", "curve"};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << what;
    }
  }
};

dsl::ScenarioSpec parse_file(const fs::path& p) {
  auto r = dsl::parse_dsl(read_text_file(p));
  if (!r.ok()) throw std::runtime_error(p.string() + " does not parse");
  return *r.spec;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

void c1_mappings(Outcome& o) {
  using dsl::RoadType;
  using dsl::TimeOfDay;
  using dsl::Weather;
  using synth::Town;
  o.require(synth::map_time(TimeOfDay::daytime) == 12, "daytime hour");
  o.require(synth::map_time(TimeOfDay::nighttime) == 22, "nighttime hour");
  o.require(synth::map_weather(Weather::sunny, TimeOfDay::nighttime) == "ClearNight", "sunny night preset");
  o.require(synth::map_weather(Weather::cloudy, TimeOfDay::daytime) == "CloudyNoon", "cloudy day preset");
  o.require(synth::select_map(RoadType::straight, 2).town == Town::Town02, "straight 2 lanes");
  o.require(synth::select_map(RoadType::straight, 4).town == Town::Town04, "straight 4 lanes");
  o.require(synth::select_map(RoadType::curve, 2).town == Town::Town02, "curve 2 lanes");
  for (int lanes = 1; lanes <= 8; ++lanes) {
    o.require(synth::select_map(RoadType::intersection, lanes).town == Town::Town05, "intersection map");
    o.require(synth::select_map(RoadType::t_intersection, lanes).town == Town::Town05, "t_intersection map");
  }
  if (o.pass) o.detail << "hours 12/22, presets, Town02/04/05 selection";
}

void c2_defaults(Outcome& o) {
  const std::string doc =
      "scenario_id: defaults\n"
      "environment:\n  weather: sunny\n  time_of_day: daytime\n"
      "road_network:\n  road_type: straight\n  number_of_ways: 2\n  number_of_lanes: 1\n"
      "  road_markers: broken_line\n  traffic_signs:\n    - not_mentioned\n"
      "actors:\n  ego:\n    actor_type: car\n    behavior: go_forward\n"
      "  npcs:\n    - actor_id: npc1\n      actor_type: truck\n      behavior: go_forward\n"
      "      position:\n        reference: ego\n        spatial_relation: front\n"
      "oracle:\n  - CVC_21461: unsafe_passing\n    description: \"x\"\n";
  const auto parsed = dsl::parse_dsl(doc);
  o.require(parsed.ok(), "minimal document parses");
  if (!parsed.ok()) return;
  const auto n = normalizer::apply_defaults(*parsed.spec, 0);
  const auto& ego = n.spec.actors.ego;
  const auto& npc = n.spec.actors.npcs.at(0);
  o.require(ego.speed_mps == 10.0, "ego speed 10 m/s");
  o.require(npc.speed_mps == 10.0, "npc speed 10 m/s");
  o.require(ego.model_id == std::optional<std::string>("vehicle.lincoln.mkz_2017"), "ego model");
  o.require(npc.model_id == std::optional<std::string>("vehicle.carlamotors.european_hgv"), "truck model");
  o.require(npc.position && npc.position->heading_relation == dsl::HeadingRelation::opposite_direction,
            "heading default");
  const auto speed = synth::widen_to_range(10, synth::RangeKind::speed);
  o.require(speed.low == 8.0 && speed.high == 12.0, "speed widening [8, 12]");
  const auto dist = synth::widen_to_range(10, synth::RangeKind::init_dist);
  o.require(dist.low == 15.0 && dist.high == 20.0, "init distance [15, 20]");
  const auto tmpl = synth::build_template(n);
  for (const auto& r : tmpl.free_parameters) {
    const bool is_speed = r.name.find("speed") != std::string::npos;
    o.require(r.low == (is_speed ? 8.0 : 15.0) && r.high == (is_speed ? 12.0 : 20.0), "template range " + r.name);
  }
  if (o.pass) o.detail << "10 m/s, mkz_2017, european_hgv, opposite_direction, [8, 12], [15, 20]";
}

struct BatchDigest {
  std::map<std::string, std::uint64_t> scenic;
  std::map<std::string, std::vector<std::uint64_t>> traces;
  std::map<std::string, std::vector<std::uint64_t>> reports;
  std::map<std::string, int> hits;
  std::map<std::string, std::set<int>> distinct;
};

BatchDigest run_road_types(int samples) {
  BatchDigest d;
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (const auto& name : kRoadTypes) {
    const auto compiled = pipeline::compile_spec(parse_file(kRoadTypeFixtures / (name + ".yaml")), 0);
    d.scenic[name] = fnv1a64(compiled.scenic.source_text);
    const auto instances = sampler::sample_batch(compiled.tmpl, samples, 0);
    const auto geometry = sim::build_geometry(compiled.tmpl);
    std::vector<std::uint64_t> traces(instances.size()), reports(instances.size());
    std::vector<monitor::ViolationReport> results(instances.size());
    pipeline::parallel_for(static_cast<int>(instances.size()), workers, [&](int i) {
      const auto k = static_cast<std::size_t>(i);
      auto run = pipeline::run_instance(compiled.tmpl, geometry, instances[k]);
      traces[k] = fnv1a64(sim::trace_text(run.trace));
      reports[k] = fnv1a64(monitor::report_text(run.report));
      results[k] = std::move(run.report);
    });
    d.traces[name] = std::move(traces);
    d.reports[name] = std::move(reports);
    for (const auto& r : results) {
      d.hits[name] += r.targeted_hit;
      const auto rules = r.distinct_rules();
      d.distinct[name].insert(static_cast<int>(rules.size()));
    }
  }
  return d;
}

std::optional<BatchDigest> first_batch;

void c3_end_to_end(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  first_batch = run_road_types(sampler::kDefaultSamples);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto expected = eval::load_expected_counts(kData / "road_type_counts.csv");
  int total_hits = 0;
  std::string counts;
  for (const auto& e : expected) {
    const int hits = first_batch->hits.at(e.road_type);
    total_hits += hits;
    o.require(hits == sampler::kDefaultSamples, e.road_type + " hits " + std::to_string(hits) + "/2000");
    const auto& distinct = first_batch->distinct.at(e.road_type);
    o.require(distinct == std::set<int>{e.expected},
              e.road_type + " distinct rule count differs from " + std::to_string(e.expected));
    counts += (counts.empty() ? "" : ",") + std::to_string(*distinct.begin());
  }
  o.require(secs <= 600.0, "runtime over 10 minutes");
  if (o.pass) o.detail << total_hits << "/12000 targeted hits, counts " << counts << ", " << std::fixed
                       << std::setprecision(1) << secs << " s";
}

void c4_determinism(Outcome& o) {
  if (!first_batch) first_batch = run_road_types(sampler::kDefaultSamples);
  const auto second = run_road_types(sampler::kDefaultSamples);
  o.require(first_batch->scenic == second.scenic, ".scenic bytes differ");
  o.require(first_batch->traces == second.traces, "trace bytes differ");
  o.require(first_batch->reports == second.reports, "report bytes differ");
  if (o.pass) o.detail << "6 programs, 12000 traces and 12000 reports hash-identical";
}

void c5_round_trip(Outcome& o) {
  std::vector<fs::path> corpus;
  for (const auto& name : kRoadTypes) corpus.push_back(kRoadTypeFixtures / (name + ".yaml"));
  for (int i = 1; corpus.size() < 50; ++i) {
    char dir[16];
    std::snprintf(dir, sizeof dir, "case_%02d", i);
    corpus.push_back(kData / "accuracy_corpus" / dir / "golden.yaml");
  }
  for (const auto& p : corpus) {
    const auto first = dsl::parse_dsl(read_text_file(p));
    o.require(first.ok(), p.filename().string() + " parses");
    if (!first.ok()) continue;
    const auto text = dsl::serialize_dsl(*first.spec);
    const auto again = dsl::parse_dsl(text);
    o.require(again.ok() && *again.spec == *first.spec && dsl::serialize_dsl(*again.spec) == text,
              "fixpoint on " + p.string());
  }
  testing::SpecGenerator gen(99);
  const int generated = 1000;
  for (int i = 0; i < generated; ++i) {
    const auto s = gen.next();
    const auto text = dsl::serialize_dsl(s);
    const auto r = dsl::parse_dsl(text);
    o.require(r.ok() && *r.spec == s && dsl::serialize_dsl(*r.spec) == text, "generated spec " + std::to_string(i));
  }

  struct Defect {
    std::string from, to;
  };
  const std::string base = read_text_file(kRoadTypeFixtures / "straight_1.yaml");
  const std::vector<Defect> defects{
      {"weather: foggy", "weather: plasma"},
      {"time_of_day: nighttime", "time_of_day: dusk"},
      {"road_type: straight", "road_type: roundabout"},
      {"number_of_lanes: 1", "number_of_lanes: 12"},
      {"road_markers: broken_line", "road_markers: dotted"},
      {"    actor_type: car\n    behavior: go_forward", "    actor_type: car\n    behavior: fly"},
      {"      actor_type: car", "      actor_type: bus"},
      {"reference: ego", "reference: ghost"},
      {"spatial_relation: front", "spatial_relation: above"},
      {"heading_relation: opposite_direction", "heading_relation: sideways"},
      {"CVC_21461", "CVC_1"},
  };
  for (const auto& d : defects) o.require(count_of(base, d.from) == 1, "defect anchor " + d.from);
  int subsets = 0;
  for (unsigned mask = 0; mask < (1u << defects.size()); ++mask, ++subsets) {
    std::string doc = base;
    int k = 0;
    for (std::size_t b = 0; b < defects.size(); ++b) {
      if (mask & (1u << b)) {
        doc.replace(doc.find(defects[b].from), defects[b].from.size(), defects[b].to);
        ++k;
      }
    }
    const auto r = dsl::parse_dsl(doc);
    o.require(static_cast<int>(r.issues.size()) >= k, "defect mask " + std::to_string(mask) + " under-reported");
  }
  if (o.pass) o.detail << corpus.size() << " documents + " << generated << " generated specs at fixpoint; " << subsets
                       << " defect subsets each report >= k issues";
}

void c6_accuracy(Outcome& o) {
  std::vector<eval::ComponentAccuracy> results;
  for (const auto& c : eval::load_corpus(kData / "accuracy_corpus")) results.push_back(eval::compare_specs(c.candidate, c.golden));
  o.require(results.size() == 50, "corpus has 50 pairs");
  const auto agg = eval::aggregate_accuracy(results);
  const auto two = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
  };
  using eval::Component;
  const std::vector<std::pair<std::string, std::string>> want{
      {two(agg.fraction(Component::environment)), "1.00"}, {two(agg.fraction(Component::road_network)), "1.00"},
      {two(agg.fraction(Component::oracle)), "0.98"},      {two(agg.fraction(Component::actor)), "0.97"},
      {two(agg.overall().fraction()), "0.99"},
  };
  for (const auto& [got, expect] : want) o.require(got == expect, "aggregate " + got + " != " + expect);
  if (o.pass) {
    o.detail << "environment " << want[0].first << ", road_network " << want[1].first << ", oracle " << want[2].first
             << ", actor " << want[3].first << ", overall " << want[4].first;
  }
}

// Pairwise direct summation over every ordered pair of distinct raters.
double direct_kappa(const std::vector<std::vector<int>>& ratings, int cats) {
  const auto w = [cats](int a, int b) { return 1.0 - std::abs(a - b) / static_cast<double>(cats - 1); };
  double po = 0.0;
  std::vector<double> pi(static_cast<std::size_t>(cats), 0.0);
  int items = 0;
  for (const auto& row : ratings) {
    std::vector<int> given;
    for (int r : row) {
      if (r >= 0) given.push_back(r);
    }
    if (given.size() < 2) continue;
    ++items;
    double agree = 0.0;
    for (std::size_t a = 0; a < given.size(); ++a) {
      for (std::size_t b = 0; b < given.size(); ++b) {
        if (a != b) agree += w(given[a], given[b]);
      }
    }
    const double m = static_cast<double>(given.size());
    po += agree / (m * (m - 1));
    for (int r : given) pi[static_cast<std::size_t>(r)] += 1.0 / m;
  }
  po /= items;
  double pe = 0.0;
  for (int k = 0; k < cats; ++k) {
    for (int l = 0; l < cats; ++l) pe += w(k, l) * (pi[k] / items) * (pi[l] / items);
  }
  return (po - pe) / (1.0 - pe);
}

void c7_kappa(Outcome& o) {
  std::mt19937_64 rng(17);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    const int cats = 2 + static_cast<int>(rng() % 4);
    const int items = 5 + static_cast<int>(rng() % 40);
    const int raters = 2 + static_cast<int>(rng() % 5);
    eval::RatingsMatrix m;
    m.categories = cats;
    for (int i = 0; i < items; ++i) {
      std::vector<int> row;
      for (int r = 0; r < raters; ++r) {
        const bool missing = r >= 2 && rng() % 6 == 0;
        row.push_back(missing ? eval::kMissingRating : static_cast<int>(rng() % static_cast<unsigned>(cats)));
      }
      m.ratings.push_back(row);
    }
    double k = 0.0;
    try {
      k = eval::fleiss_kappa(m).kappa;
    } catch (const eval::UndefinedKappa&) {
      continue;
    }
    worst = std::max(worst, std::abs(k - direct_kappa(m.ratings, cats)));
    ++checked;
  }
  o.require(worst <= 1e-9, "max |dk| " + std::to_string(worst));
  const auto unanimous = eval::fleiss_kappa({{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {1, 1, 1}}, 3});
  o.require(unanimous.kappa == 1.0, "unanimous kappa " + std::to_string(unanimous.kappa));
  o.require(eval::landis_koch_band(0.68) == eval::AgreementBand::substantial, "0.68 band");
  if (o.pass) o.detail << checked << " matrices, max |dk| = " << worst << "; unanimous 1.0; 0.68 substantial";
}

bool inside(const sim::Obb& r, Vec2 p) {
  const double dx = p.x - r.center.x, dy = p.y - r.center.y;
  const double u = dx * std::cos(r.heading) + dy * std::sin(r.heading);
  const double v = -dx * std::sin(r.heading) + dy * std::cos(r.heading);
  return std::abs(u) <= r.length / 2 && std::abs(v) <= r.width / 2;
}

// Perimeter points of each rectangle tested against the other at 2 mm spacing.
bool sampled_overlap(const sim::Obb& a, const sim::Obb& b) {
  const auto probe = [](const sim::Obb& r, const sim::Obb& other) {
    const double c = std::cos(r.heading), s = std::sin(r.heading);
    const auto at = [&](double u, double v) { return Vec2{r.center.x + u * c - v * s, r.center.y + u * s + v * c}; };
    const double hl = r.length / 2, hw = r.width / 2, step = 0.002;
    for (double u = -hl; u <= hl; u += step) {
      if (inside(other, at(u, hw)) || inside(other, at(u, -hw))) return true;
    }
    for (double v = -hw; v <= hw; v += step) {
      if (inside(other, at(hl, v)) || inside(other, at(-hl, v))) return true;
    }
    return inside(other, r.center);
  };
  return probe(a, b) || probe(b, a);
}

void c8_collision(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-7.0, 7.0), ang(-std::numbers::pi, std::numbers::pi);
  int outside_band = 0, in_band = 0, overlapping = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool truck_a = rng() % 4 == 0, truck_b = rng() % 4 == 0;
    const sim::Obb a{{0, 0}, ang(rng), truck_a ? 8.0 : 4.5, truck_a ? 2.5 : 2.0};
    const sim::Obb b{{pos(rng), pos(rng)}, ang(rng), truck_b ? 8.0 : 4.5, truck_b ? 2.5 : 2.0};
    const bool sat = sim::overlaps(a, b);
    overlapping += sat;
    if (sat == sampled_overlap(a, b)) continue;
    sim::Obb grown = b, shrunk = b;
    grown.length += 0.02;
    grown.width += 0.02;
    shrunk.length -= 0.02;
    shrunk.width -= 0.02;
    if (sampled_overlap(a, grown) != sampled_overlap(a, shrunk)) {
      ++in_band;
    } else {
      ++outside_band;
    }
  }
  o.require(outside_band == 0, std::to_string(outside_band) + " disagreements outside the 1 cm band");
  if (o.pass) o.detail << "1000 pairs (" << overlapping << " overlapping), " << in_band << " in-band disagreements";
}

void c9_sampler(Outcome& o) {
  synth::ScenarioTemplate t;
  t.params.scenario_id = "sampler";
  t.free_parameters = {synth::widen_to_range(10, synth::RangeKind::speed, "ego_speed")};
  const auto a = sampler::sample_batch(t, 2000, 0);
  const auto b = sampler::sample_batch(t, 2000, 0);
  double sum = 0.0;
  bool in_bounds = true, identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a[i].binding("ego_speed");
    const double w = b[i].binding("ego_speed");
    sum += v;
    in_bounds = in_bounds && v >= 8.0 && v <= 12.0;
    identical = identical && std::memcmp(&v, &w, sizeof v) == 0;
  }
  const double mean = sum / static_cast<double>(a.size());
  o.require(a.size() == 2000, "sample count");
  o.require(mean >= 9.9 && mean <= 10.1, "mean " + std::to_string(mean));
  o.require(in_bounds, "sample outside [8, 12]");
  o.require(identical, "bindings differ across identical seeds");
  if (o.pass) o.detail << "mean " << std::setprecision(6) << mean << ", all in [8, 12], bit-identical on replay";
}

void c10_extraction(Outcome& o) {
  llm::FixtureTransport transport(llm::load_transcripts(kExtraction / "transcripts.json"));
  const llm::ClientConfig config;
  std::string detail;
  for (const std::string id : {"case_success", "case_retry"}) {
    const auto report = llm::load_report(kExtraction / "reports" / (id + ".json"));
    const auto r = llm::extract_and_validate(report, transport, config);
    o.require(dsl::validate_spec(r.spec).empty(), id + " spec has issues");
    o.require(dsl::parse_dsl(r.document).ok(), id + " accepted document does not parse");
    detail += id + " retries " + std::to_string(r.retries()) + ", ";
  }
  o.require(detail.find("case_success retries 0") != std::string::npos, "success path retried");
  o.require(detail.find("case_retry retries 1") != std::string::npos, "retry path did not retry once");
  try {
    llm::extract_and_validate(llm::load_report(kExtraction / "reports" / "case_exhausted.json"), transport, config);
    o.require(false, "exhaustion path succeeded");
  } catch (const llm::ExtractionError& e) {
    o.require(e.attempts() == config.max_retries + 1, "exhaustion attempts");
    detail += "case_exhausted fails after " + std::to_string(e.attempts()) + " attempts";
  }
  if (o.pass) o.detail << detail;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"mapping fidelity", c1_mappings},
      {"defaults and widening", c2_defaults},
      {"end-to-end violation triggering", c3_end_to_end},
      {"determinism", c4_determinism},
      {"round trip and validation", c5_round_trip},
      {"accuracy scoring reproduction", c6_accuracy},
      {"fleiss kappa", c7_kappa},
      {"collision detection", c8_collision},
      {"sampler statistics", c9_sampler},
      {"offline extraction loop", c10_extraction},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail.str()
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
