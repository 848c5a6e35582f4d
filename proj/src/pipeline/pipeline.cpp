#include "scenforge/pipeline/pipeline.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "scenforge/common/io.hpp"
#include "scenforge/dsl/document.hpp"

namespace scenforge::pipeline {
namespace fs = std::filesystem;

namespace {

bool is_report_input(const fs::path& p) { return p.extension() == ".json"; }

struct StageFailure : std::runtime_error {
  StageFailure(std::string stage, const std::string& message)
      : std::runtime_error(message), stage(std::move(stage)) {}
  std::string stage;
};

std::string issues_text(const std::vector<dsl::ValidationIssue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "; ";
    out += i.path + ": " + i.message;
  }
  return out;
}

struct Source {
  dsl::ScenarioSpec spec;
  std::vector<std::string> normalized_paths;
  std::optional<llm::ExtractionResult> extraction;
};

Source read_source(const fs::path& input, const normalizer::SynonymTable& table, llm::ChatTransport* transport,
                   const PipelineConfig& config, const llm::PromptSet& prompts) {
  if (is_report_input(input)) {
    llm::CrashReport report;
    try {
      report = llm::load_report(input);
    } catch (const std::exception& e) {
      throw StageFailure("read", e.what());
    }
    try {
      auto result = llm::extract_and_validate(report, *transport, config.client, prompts);
      auto spec = result.spec;
      return {std::move(spec), {}, std::move(result)};
    } catch (const llm::ExtractionError& e) {
      throw StageFailure("extract", std::string(e.what()) + ": " + issues_text(e.issues()));
    } catch (const llm::TransportError& e) {
      throw StageFailure("extract", e.what());
    }
  }
  std::string text;
  try {
    text = read_text_file(input);
  } catch (const std::exception& e) {
    throw StageFailure("read", e.what());
  }
  auto parsed = dsl::parse_dsl(text, normalizer::parse_options(table));
  if (!parsed.ok()) throw StageFailure("parse", issues_text(parsed.issues));
  return {std::move(*parsed.spec), std::move(parsed.canonicalized_paths), std::nullopt};
}

InputStatus run_input(const fs::path& input, const PipelineConfig& config, const normalizer::SynonymTable& table,
                      llm::ChatTransport* transport, const llm::PromptSet& prompts, std::set<std::string>& used_ids,
                      std::vector<std::string>& summary_rows) {
  InputStatus status;
  status.input = input.string();
  try {
    auto source = read_source(input, table, transport, config, prompts);
    status.scenario_id = source.spec.scenario_id;
    const std::string name = artifact_name(source.spec.scenario_id);
    if (!used_ids.insert(name).second) {
      throw StageFailure("parse", "duplicate scenario_id " + source.spec.scenario_id);
    }

    CompiledScenario compiled;
    try {
      compiled = compile_spec(source.spec, config.base_seed, source.normalized_paths);
    } catch (const synth::CompatibilityError& e) {
      throw StageFailure("synth", e.what());
    }

    const fs::path dir = config.out_dir / name;
    try {
      write_file_atomic(dir / "scenario.yaml", dsl::serialize_dsl(source.spec));
      if (source.extraction) {
        const nlohmann::json ex{{"case_id", source.spec.scenario_id},
                                {"extraction_attempts", source.extraction->extraction_attempts},
                                {"validation_attempts", source.extraction->validation_attempts},
                                {"retries", source.extraction->retries()}};
        write_file_atomic(dir / "extraction.json", ex.dump(2) + "\n");
      }
      write_file_atomic(dir / "normalized.json", normalizer::to_json(compiled.normalized).dump(2) + "\n");
      write_file_atomic(dir / (name + ".scenic"), compiled.scenic.source_text);
      write_file_atomic(dir / "template.json", synth::template_text(compiled.tmpl));
    } catch (const std::exception& e) {
      throw StageFailure("write", e.what());
    }

    const auto instances = sampler::sample_batch(compiled.tmpl, config.samples, config.base_seed);
    write_file_atomic(dir / "instances.jsonl", sampler::manifest_text(instances));

    const auto geometry = sim::build_geometry(compiled.tmpl);
    std::vector<monitor::ViolationReport> reports(instances.size());
    try {
      parallel_for(static_cast<int>(instances.size()), config.workers, [&](int i) {
        const auto& inst = instances[static_cast<std::size_t>(i)];
        auto run = run_instance(compiled.tmpl, geometry, inst);
        const std::string seed = std::to_string(inst.instance_seed);
        write_file_atomic(dir / "traces" / (seed + ".jsonl"), sim::trace_text(run.trace));
        write_file_atomic(dir / "reports" / (seed + ".json"), monitor::report_text(run.report));
        reports[static_cast<std::size_t>(i)] = std::move(run.report);
      });
    } catch (const std::exception& e) {
      throw StageFailure("simulate", e.what());
    }

    for (const auto& r : reports) {
      summary_rows.push_back(monitor::summary_csv_row(r));
      if (r.targeted_hit) ++status.targeted_hits;
      if (!r.collisions.empty()) ++status.collisions;
    }
    status.instances = static_cast<int>(reports.size());
    status.ok = true;
  } catch (const StageFailure& e) {
    status.failed_stage = e.stage;
    status.message = e.what();
  } catch (const std::exception& e) {
    status.failed_stage = "internal";
    status.message = e.what();
  }
  return status;
}

}  // namespace

void check_config(const PipelineConfig& config) {
  if (config.inputs.empty()) throw ConfigError("no inputs given");
  if (config.samples < 1) throw ConfigError("samples must be >= 1");
  if (config.workers < 1) throw ConfigError("workers must be >= 1");
  if (config.client.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (config.synonyms && !fs::is_regular_file(*config.synonyms)) {
    throw ConfigError("synonym table not found: " + config.synonyms->string());
  }
  if (config.prompts_dir && !fs::is_directory(*config.prompts_dir)) {
    throw ConfigError("prompt directory not found: " + config.prompts_dir->string());
  }
  if (config.transcripts && !fs::is_regular_file(*config.transcripts)) {
    throw ConfigError("transcript file not found: " + config.transcripts->string());
  }
  const bool has_reports = std::any_of(config.inputs.begin(), config.inputs.end(), is_report_input);
  if (has_reports && config.offline && !config.transcripts) {
    throw ConfigError("offline extraction needs fixture transcripts");
  }
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec || !fs::is_directory(config.out_dir)) {
    throw ConfigError("cannot create output directory " + config.out_dir.string());
  }
}

CompiledScenario compile_spec(const dsl::ScenarioSpec& spec, std::uint64_t seed,
                              const std::vector<std::string>& normalized_paths) {
  CompiledScenario c;
  c.normalized = normalizer::apply_defaults(spec, seed, normalized_paths);
  c.tmpl = synth::build_template(c.normalized);
  c.scenic = synth::render_scenic(c.tmpl);
  return c;
}

InstanceRun run_instance(const synth::ScenarioTemplate& tmpl, const sim::RoadGeometry& geometry,
                         const sampler::ScenarioInstance& instance) {
  InstanceRun run;
  run.trace = sim::simulate(tmpl, instance, geometry);
  run.report = monitor::monitor(run.trace, tmpl.params.oracle, geometry);
  return run;
}

sim::Trace load_trace(std::string_view text, const synth::ScenarioTemplate& tmpl, const sim::RoadGeometry& geometry,
                      std::uint64_t seed) {
  sim::Trace t;
  t.scenario_id = tmpl.params.scenario_id;
  t.instance_seed = seed;
  t.geometry_ref = geometry.digest();
  t.frames = sim::parse_trace_frames(text);
  return t;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const int threads = std::max(1, std::min(workers, n));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::string artifact_name(const std::string& scenario_id) {
  std::string out = scenario_id;
  for (char& c : out) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    if (!keep) c = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

bool PipelineResult::all_ok() const {
  return std::all_of(inputs.begin(), inputs.end(), [](const InputStatus& s) { return s.ok; });
}

nlohmann::json to_json(const PipelineResult& result) {
  nlohmann::json j;
  j["ok"] = result.all_ok();
  j["inputs"] = nlohmann::json::array();
  for (const auto& s : result.inputs) {
    nlohmann::json e{{"input", s.input},        {"scenario_id", s.scenario_id},     {"ok", s.ok},
                     {"instances", s.instances}, {"targeted_hits", s.targeted_hits}, {"collisions", s.collisions}};
    if (!s.ok) {
      e["failed_stage"] = s.failed_stage;
      e["message"] = s.message;
    }
    j["inputs"].push_back(e);
  }
  return j;
}

PipelineResult run_pipeline(const PipelineConfig& config, llm::ChatTransport* transport) {
  check_config(config);
  const auto table = config.synonyms ? normalizer::SynonymTable::load(*config.synonyms)
                                     : normalizer::SynonymTable::builtin();
  const auto prompts = config.prompts_dir ? llm::PromptSet::load(*config.prompts_dir) : llm::PromptSet::builtin();

  std::unique_ptr<llm::ChatTransport> owned;
  const bool has_reports = std::any_of(config.inputs.begin(), config.inputs.end(), is_report_input);
  if (!transport && has_reports) {
    try {
      if (config.transcripts) {
        owned = std::make_unique<llm::FixtureTransport>(llm::load_transcripts(*config.transcripts));
      } else {
        owned = std::make_unique<llm::HttpChatTransport>(config.client);
      }
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    transport = owned.get();
  }

  PipelineResult result;
  std::set<std::string> used_ids;
  std::string summary = monitor::summary_csv_header();
  for (const auto& input : config.inputs) {
    std::vector<std::string> rows;
    result.inputs.push_back(run_input(input, config, table, transport, prompts, used_ids, rows));
    for (const auto& r : rows) summary += r;
  }
  write_file_atomic(config.out_dir / "summary.csv", summary);
  write_file_atomic(config.out_dir / "batch.json", to_json(result).dump(2) + "\n");
  return result;
}

}  // namespace scenforge::pipeline
