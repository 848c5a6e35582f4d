#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenforge/dsl/spec.hpp"
#include "scenforge/llm/extractor.hpp"
#include "scenforge/monitor/monitor.hpp"
#include "scenforge/normalizer/normalizer.hpp"
#include "scenforge/sampler/sampler.hpp"
#include "scenforge/sim/sim.hpp"
#include "scenforge/synth/synth.hpp"

namespace scenforge::pipeline {

/// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  /// DSL documents (.yaml/.yml) or crash-report fixtures (.json).
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path out_dir = "out";
  int samples = sampler::kDefaultSamples;
  std::uint64_t base_seed = 0;
  int workers = 1;
  bool offline = false;
  std::optional<std::filesystem::path> synonyms;
  /// Fixture transcripts for offline extraction.
  std::optional<std::filesystem::path> transcripts;
  std::optional<std::filesystem::path> prompts_dir;
  llm::ClientConfig client;
};

/// Throws ConfigError.
void check_config(const PipelineConfig& config);

struct CompiledScenario {
  normalizer::NormalizedSpec normalized;
  synth::ScenarioTemplate tmpl;
  synth::ScenicProgram scenic;
};

/// Normalize and synthesize. Throws synth::CompatibilityError.
CompiledScenario compile_spec(const dsl::ScenarioSpec& spec, std::uint64_t seed,
                              const std::vector<std::string>& normalized_paths = {});

struct InstanceRun {
  sim::Trace trace;
  monitor::ViolationReport report;
};

InstanceRun run_instance(const synth::ScenarioTemplate& tmpl, const sim::RoadGeometry& geometry,
                         const sampler::ScenarioInstance& instance);

/// Reattaches the identity a trace file does not carry.
sim::Trace load_trace(std::string_view text, const synth::ScenarioTemplate& tmpl, const sim::RoadGeometry& geometry,
                      std::uint64_t seed);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads. The first
/// exception is rethrown after all workers stop.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Directory name for a scenario id: characters outside [A-Za-z0-9._-]
/// become '_'.
std::string artifact_name(const std::string& scenario_id);

struct InputStatus {
  std::string input;
  std::string scenario_id;
  bool ok = false;
  std::string failed_stage;  // empty when ok
  std::string message;
  int instances = 0;
  int targeted_hits = 0;
  int collisions = 0;
};

struct PipelineResult {
  std::vector<InputStatus> inputs;

  bool all_ok() const;
  int exit_code() const { return all_ok() ? 0 : 1; }
};

/// Per input: (extract ->) parse -> normalize -> synth -> sample -> simulate
/// -> monitor, writing <out>/<id>/{scenario.yaml, normalized.json, <id>.scenic,
/// template.json, instances.jsonl, traces/<seed>.jsonl, reports/<seed>.json}
/// plus <out>/summary.csv and <out>/batch.json. A failing input is recorded
/// and the batch continues. `transport` overrides the transport chosen from
/// the config. Throws ConfigError.
PipelineResult run_pipeline(const PipelineConfig& config, llm::ChatTransport* transport = nullptr);

nlohmann::json to_json(const PipelineResult& result);

}  // namespace scenforge::pipeline
