#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scenforge/synth/synth.hpp"

namespace scenforge::sampler {

inline constexpr int kDefaultSamples = 2000;

struct ScenarioInstance {
  std::string scenario_id;
  std::uint64_t template_digest = 0;
  std::uint64_t instance_seed = 0;
  /// One entry per free parameter.
  std::map<std::string, double> bindings;
  std::map<std::string, double> fixed;

  bool operator==(const ScenarioInstance&) const = default;
  double binding(std::string_view name) const;
};

/// Stream seed of one parameter: seed mixed with the FNV-1a hash of its name.
std::uint64_t parameter_stream_seed(std::uint64_t seed, std::string_view name);
/// Uniform draw in [low, high]; a zero-width range yields `low` exactly.
double draw_uniform(std::uint64_t stream_seed, double low, double high);

ScenarioInstance sample_instance(const synth::ScenarioTemplate& tmpl, std::uint64_t seed);
/// Seeds base_seed .. base_seed + n - 1, in order.
std::vector<ScenarioInstance> sample_batch(const synth::ScenarioTemplate& tmpl, int n = kDefaultSamples,
                                           std::uint64_t base_seed = 0);

nlohmann::json to_json(const ScenarioInstance& inst);
ScenarioInstance instance_from_json(const nlohmann::json& j);
/// JSON Lines, one instance per line, sorted keys.
std::string manifest_text(const std::vector<ScenarioInstance>& instances);
std::vector<ScenarioInstance> parse_manifest(std::string_view text);

}  // namespace scenforge::sampler
