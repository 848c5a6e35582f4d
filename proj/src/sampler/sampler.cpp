#include "scenforge/sampler/sampler.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "scenforge/common/digest.hpp"
#include "scenforge/common/splitmix.hpp"

namespace scenforge::sampler {

double ScenarioInstance::binding(std::string_view name) const {
  const auto it = bindings.find(std::string(name));
  if (it == bindings.end()) throw std::out_of_range("unbound parameter " + std::string(name));
  return it->second;
}

std::uint64_t parameter_stream_seed(std::uint64_t seed, std::string_view name) { return seed ^ fnv1a64(name); }

double draw_uniform(std::uint64_t stream_seed, double low, double high) {
  if (!(high > low)) return low;
  SplitMix64 rng(stream_seed);
  const double v = low + (high - low) * rng.next_unit();
  return std::clamp(v, low, high);
}

ScenarioInstance sample_instance(const synth::ScenarioTemplate& tmpl, std::uint64_t seed) {
  ScenarioInstance inst;
  inst.scenario_id = tmpl.params.scenario_id;
  inst.template_digest = synth::template_digest(tmpl);
  inst.instance_seed = seed;
  for (const auto& r : tmpl.free_parameters) {
    inst.bindings[r.name] = draw_uniform(parameter_stream_seed(seed, r.name), r.low, r.high);
  }
  inst.fixed = tmpl.fixed_parameters;
  return inst;
}

std::vector<ScenarioInstance> sample_batch(const synth::ScenarioTemplate& tmpl, int n, std::uint64_t base_seed) {
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  std::vector<ScenarioInstance> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_instance(tmpl, base_seed + static_cast<std::uint64_t>(i)));
  return out;
}

nlohmann::json to_json(const ScenarioInstance& inst) {
  return nlohmann::json{{"scenario_id", inst.scenario_id},
                        {"template_digest", digest_hex(inst.template_digest)},
                        {"instance_seed", inst.instance_seed},
                        {"bindings", inst.bindings},
                        {"fixed", inst.fixed}};
}

ScenarioInstance instance_from_json(const nlohmann::json& j) {
  try {
    ScenarioInstance inst;
    inst.scenario_id = j.at("scenario_id").get<std::string>();
    inst.template_digest = parse_digest_hex(j.at("template_digest").get<std::string>());
    inst.instance_seed = j.at("instance_seed").get<std::uint64_t>();
    inst.bindings = j.at("bindings").get<std::map<std::string, double>>();
    inst.fixed = j.at("fixed").get<std::map<std::string, double>>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed instance: ") + e.what());
  }
}

std::string manifest_text(const std::vector<ScenarioInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += to_json(inst).dump();
    out += '\n';
  }
  return out;
}

std::vector<ScenarioInstance> parse_manifest(std::string_view text) {
  std::vector<ScenarioInstance> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(instance_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace scenforge::sampler
