#include "scenforge/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scenforge/common/io.hpp"
#include "scenforge/common/number_format.hpp"
#include "scenforge/dsl/document.hpp"

namespace scenforge::eval {
namespace {

class Scorer {
 public:
  explicit Scorer(ComponentAccuracy& out) : out_(out) {
    for (auto c : kComponents) out_.scores[c];
  }

  template <typename T>
  void field(Component c, const std::string& path, const T& candidate, const T& golden) {
    record(c, path, candidate == golden);
  }

  void record(Component c, const std::string& path, bool match) {
    auto& s = out_.scores[c];
    ++s.total;
    if (match) ++s.matched;
    out_.per_field[path] = match;
  }

 private:
  ComponentAccuracy& out_;
};

void compare_actor(Scorer& s, const std::string& prefix, const dsl::ActorSpec* cand, const dsl::ActorSpec& gold,
                   bool npc) {
  const auto c = Component::actor;
  if (!cand) {
    s.record(c, prefix + ".actor_type", false);
    s.record(c, prefix + ".behavior", false);
    if (npc) {
      s.record(c, prefix + ".position.reference", false);
      s.record(c, prefix + ".position.spatial_relation", false);
      s.record(c, prefix + ".position.heading_relation", false);
    }
    return;
  }
  s.field(c, prefix + ".actor_type", cand->actor_type, gold.actor_type);
  s.field(c, prefix + ".behavior", cand->behavior, gold.behavior);
  if (!npc) return;
  const auto ref = [](const dsl::ActorSpec* a) { return a->position ? a->position->reference : std::string(); };
  const auto spatial = [](const dsl::ActorSpec* a) {
    return a->position ? std::optional(a->position->spatial_relation) : std::nullopt;
  };
  const auto heading = [](const dsl::ActorSpec* a) {
    return a->position ? a->position->heading_relation : std::nullopt;
  };
  s.field(c, prefix + ".position.reference", ref(cand), ref(&gold));
  s.field(c, prefix + ".position.spatial_relation", spatial(cand), spatial(&gold));
  s.field(c, prefix + ".position.heading_relation", heading(cand), heading(&gold));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

FieldScore& FieldScore::operator+=(const FieldScore& o) {
  matched += o.matched;
  total += o.total;
  return *this;
}

std::string_view component_name(Component c) {
  switch (c) {
    case Component::environment: return "environment";
    case Component::road_network: return "road_network";
    case Component::actor: return "actor";
    case Component::oracle: return "oracle";
  }
  return "?";
}

FieldScore ComponentAccuracy::overall() const {
  FieldScore sum;
  for (const auto& [c, s] : scores) sum += s;
  return sum;
}

ComponentAccuracy compare_specs(const dsl::ScenarioSpec& candidate, const dsl::ScenarioSpec& golden) {
  ComponentAccuracy out;
  Scorer s(out);
  const auto& ce = candidate.environment;
  const auto& ge = golden.environment;
  s.field(Component::environment, "environment.weather", ce.weather, ge.weather);
  s.record(Component::environment, "environment.time_of_day",
           ce.time_of_day == ge.time_of_day && ce.time_hour == ge.time_hour);

  const auto& cr = candidate.road_network;
  const auto& gr = golden.road_network;
  const auto r = Component::road_network;
  s.field(r, "road_network.road_type", cr.road_type, gr.road_type);
  s.field(r, "road_network.number_of_ways", cr.number_of_ways, gr.number_of_ways);
  s.field(r, "road_network.number_of_lanes", cr.number_of_lanes, gr.number_of_lanes);
  s.field(r, "road_network.road_markers", cr.road_markers, gr.road_markers);
  for (auto sign : {dsl::TrafficSign::stop_sign, dsl::TrafficSign::speed_limit_sign, dsl::TrafficSign::traffic_light}) {
    s.field(r, "road_network.traffic_signs." + std::string(dsl::to_token(sign)), cr.has_sign(sign), gr.has_sign(sign));
  }
  s.field(r, "road_network.speed_limit_value", cr.speed_limit_value, gr.speed_limit_value);

  compare_actor(s, "actors.ego", &candidate.actors.ego, golden.actors.ego, false);
  for (std::size_t i = 0; i < golden.actors.npcs.size(); ++i) {
    const auto* cand = i < candidate.actors.npcs.size() ? &candidate.actors.npcs[i] : nullptr;
    compare_actor(s, "actors.npcs[" + std::to_string(i) + "]", cand, golden.actors.npcs[i], true);
  }
  // Extra candidate NPCs are hallucinated actors.
  for (std::size_t i = golden.actors.npcs.size(); i < candidate.actors.npcs.size(); ++i) {
    compare_actor(s, "actors.npcs[" + std::to_string(i) + "]", nullptr, candidate.actors.npcs[i], true);
  }

  const auto o = Component::oracle;
  const std::size_t entries = std::max(candidate.oracle.size(), golden.oracle.size());
  for (std::size_t i = 0; i < entries; ++i) {
    const std::string p = "oracle[" + std::to_string(i) + "]";
    const bool both = i < candidate.oracle.size() && i < golden.oracle.size();
    s.record(o, p + ".rule_id", both && candidate.oracle[i].rule_id == golden.oracle[i].rule_id);
    s.record(o, p + ".violation_type", both && candidate.oracle[i].violation_type == golden.oracle[i].violation_type);
  }
  return out;
}

ComponentAccuracy aggregate_accuracy(const std::vector<ComponentAccuracy>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate_accuracy needs at least one result");
  if (results.size() == 1) return results.front();
  ComponentAccuracy out;
  for (auto c : kComponents) out.scores[c];
  for (const auto& r : results) {
    for (const auto& [c, s] : r.scores) out.scores[c] += s;
  }
  return out;
}

std::string accuracy_csv(const ComponentAccuracy& a) {
  std::ostringstream o;
  o << "component,matched,total,fraction\n";
  const auto row = [&](std::string_view name, const FieldScore& s) {
    o << name << ',' << s.matched << ',' << s.total << ',' << format_sig6(s.fraction()) << '\n';
  };
  for (auto c : kComponents) row(component_name(c), a.score(c));
  row("overall", a.overall());
  return o.str();
}

nlohmann::json to_json(const ComponentAccuracy& a) {
  nlohmann::json j;
  for (auto c : kComponents) {
    const auto& s = a.score(c);
    j["components"][std::string(component_name(c))] = {
        {"matched", s.matched}, {"total", s.total}, {"fraction", s.fraction()}};
  }
  const auto all = a.overall();
  j["overall"] = {{"matched", all.matched}, {"total", all.total}, {"fraction", all.fraction()}};
  j["per_field"] = a.per_field;
  return j;
}

std::vector<CorpusCase> load_corpus(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> cases;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "golden.yaml")) cases.push_back(entry.path());
  }
  std::sort(cases.begin(), cases.end());
  std::vector<CorpusCase> out;
  for (const auto& c : cases) {
    const auto load = [](const std::filesystem::path& p) {
      auto r = dsl::parse_dsl(read_text_file(p));
      if (!r.ok()) throw std::runtime_error(p.string() + ": document has " + std::to_string(r.issues.size()) + " issue(s)");
      return *r.spec;
    };
    out.push_back({c.filename().string(), load(c / "candidate.yaml"), load(c / "golden.yaml")});
  }
  return out;
}

double RatingsMatrix::weight(int j, int k) const {
  return 1.0 - static_cast<double>(std::abs(j - k)) / static_cast<double>(categories - 1);
}

std::string_view band_name(AgreementBand b) {
  switch (b) {
    case AgreementBand::poor: return "poor";
    case AgreementBand::slight: return "slight";
    case AgreementBand::fair: return "fair";
    case AgreementBand::moderate: return "moderate";
    case AgreementBand::substantial: return "substantial";
    case AgreementBand::almost_perfect: return "almost_perfect";
  }
  return "?";
}

AgreementBand landis_koch_band(double kappa) {
  if (kappa < 0.0) return AgreementBand::poor;
  if (kappa <= 0.20) return AgreementBand::slight;
  if (kappa <= 0.40) return AgreementBand::fair;
  if (kappa <= 0.60) return AgreementBand::moderate;
  if (kappa <= 0.80) return AgreementBand::substantial;
  return AgreementBand::almost_perfect;
}

KappaResult fleiss_kappa(const RatingsMatrix& m) {
  const int C = m.categories;
  if (C < 2) throw std::invalid_argument("kappa needs at least two categories");
  if (m.ratings.empty()) throw std::invalid_argument("kappa needs at least one item");

  // counts[i][k]: raters placing item i in category k.
  std::vector<std::vector<double>> counts;
  for (std::size_t i = 0; i < m.ratings.size(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(C), 0.0);
    int raters = 0;
    for (int r : m.ratings[i]) {
      if (r == kMissingRating) continue;
      if (r < 0 || r >= C) throw std::invalid_argument("rating out of range at item " + std::to_string(i));
      row[static_cast<std::size_t>(r)] += 1.0;
      ++raters;
    }
    if (raters < 2) throw std::invalid_argument("item " + std::to_string(i) + " has fewer than two ratings");
    counts.push_back(std::move(row));
  }

  const double n = static_cast<double>(counts.size());
  std::vector<double> pi(static_cast<std::size_t>(C), 0.0);
  double po = 0.0;
  for (const auto& row : counts) {
    double ri = 0.0;
    for (double x : row) ri += x;
    double agree = 0.0;
    for (int k = 0; k < C; ++k) {
      double weighted = 0.0;
      for (int l = 0; l < C; ++l) weighted += m.weight(k, l) * row[static_cast<std::size_t>(l)];
      agree += row[static_cast<std::size_t>(k)] * (weighted - 1.0);
      pi[static_cast<std::size_t>(k)] += row[static_cast<std::size_t>(k)] / ri / n;
    }
    po += agree / (ri * (ri - 1.0)) / n;
  }
  double pe = 0.0;
  for (int k = 0; k < C; ++k) {
    for (int l = 0; l < C; ++l) pe += m.weight(k, l) * pi[static_cast<std::size_t>(k)] * pi[static_cast<std::size_t>(l)];
  }
  if (std::abs(1.0 - pe) < 1e-12) throw UndefinedKappa("chance agreement is 1; kappa is undefined");
  KappaResult out;
  out.observed = po;
  out.expected = pe;
  out.kappa = (po - pe) / (1.0 - pe);
  out.band = landis_koch_band(out.kappa);
  return out;
}

std::vector<ExpectedCount> load_expected_counts(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.front() != "road_type" || header.back() != "oracle_count") {
    throw std::invalid_argument(path.string() + ": expected header road_type,...,oracle_count");
  }
  std::vector<ExpectedCount> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw std::invalid_argument(path.string() + ": bad row: " + line);
    ExpectedCount e;
    e.road_type = cells.front();
    for (std::size_t i = 1; i + 1 < cells.size(); ++i) e.assessors.push_back(std::stoi(cells[i]));
    e.expected = std::stoi(cells.back());
    out.push_back(std::move(e));
  }
  return out;
}

AgreementTable compare_violation_counts(const std::map<std::string, std::vector<monitor::ViolationReport>>& reports,
                                        const std::vector<ExpectedCount>& expected) {
  AgreementTable t;
  for (const auto& e : expected) {
    const auto it = reports.find(e.road_type);
    if (it == reports.end() || it->second.empty()) {
      throw std::invalid_argument("no reports for road type " + e.road_type);
    }
    const int observed = static_cast<int>(it->second.front().distinct_rules().size());
    t.rows.push_back({e.road_type, observed, e.expected, observed == e.expected, e.assessors});
  }
  return t;
}

std::string agreement_csv(const AgreementTable& t) {
  std::size_t assessors = 0;
  for (const auto& r : t.rows) assessors = std::max(assessors, r.assessors.size());
  std::ostringstream o;
  o << "road_type";
  for (std::size_t i = 0; i < assessors; ++i) o << ",human_assessor_" << i + 1;
  o << ",oracle_count,observed_count,exact_match\n";
  for (const auto& r : t.rows) {
    o << r.road_type;
    for (std::size_t i = 0; i < assessors; ++i) {
      o << ',';
      if (i < r.assessors.size()) o << r.assessors[i];
    }
    o << ',' << r.expected << ',' << r.observed << ',' << (r.exact_match ? "true" : "false") << '\n';
  }
  return o.str();
}

}  // namespace scenforge::eval
