#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scenforge/common/io.hpp"
#include "scenforge/common/number_format.hpp"
#include "scenforge/dsl/document.hpp"
#include "scenforge/eval/eval.hpp"
#include "scenforge/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace scenforge;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfig = 2;

struct ConfigProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const fs::path& p) {
  try {
    return read_text_file(p);
  } catch (const std::exception& e) {
    throw ConfigProblem(e.what());
  }
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_input(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigProblem(p.string() + ": " + e.what());
  }
}

void emit(const std::optional<fs::path>& out, const std::string& text) {
  if (out) {
    write_file_atomic(*out, text);
  } else {
    std::cout << text;
  }
}

nlohmann::json issues_json(const std::vector<dsl::ValidationIssue>& issues) {
  auto j = nlohmann::json::array();
  for (const auto& i : issues) {
    nlohmann::json e{{"path", i.path}, {"kind", std::string(dsl::issue_kind_name(i.kind))}, {"message", i.message}};
    if (!i.allowed.empty()) e["allowed"] = i.allowed;
    j.push_back(e);
  }
  return j;
}

normalizer::SynonymTable synonym_table(const std::optional<fs::path>& path) {
  if (!path) return normalizer::SynonymTable::builtin();
  try {
    return normalizer::SynonymTable::load(*path);
  } catch (const std::exception& e) {
    throw ConfigProblem(e.what());
  }
}

dsl::ParseResult parse_document(const fs::path& doc, const std::optional<fs::path>& synonyms) {
  return dsl::parse_dsl(read_input(doc), normalizer::parse_options(synonym_table(synonyms)));
}

synth::ScenarioTemplate read_template(const fs::path& p) {
  try {
    return synth::template_from_json(read_json(p));
  } catch (const std::invalid_argument& e) {
    throw ConfigProblem(p.string() + ": " + e.what());
  }
}

std::uint64_t seed_of(const fs::path& trace) {
  try {
    return std::stoull(trace.stem().string());
  } catch (const std::exception&) {
    throw ConfigProblem("trace file name must be <seed>.jsonl: " + trace.string());
  }
}

struct Options {
  fs::path doc;
  fs::path file;
  fs::path second;
  std::vector<fs::path> files;
  std::optional<fs::path> out;
  std::optional<fs::path> synonyms;
  std::optional<fs::path> transcripts;
  std::optional<fs::path> prompts;
  std::optional<fs::path> expected;
  std::uint64_t seed = 0;
  int samples = sampler::kDefaultSamples;
  int workers = 1;
  bool offline = false;
  llm::ClientConfig client;
};

int cmd_parse(const Options& o) {
  const auto r = parse_document(o.doc, o.synonyms);
  if (!r.issues.empty()) std::cerr << issues_json(r.issues).dump(2) << '\n';
  if (!r.ok()) return kPartial;
  emit(o.out, dsl::serialize_dsl(*r.spec));
  return kOk;
}

int cmd_validate(const Options& o) {
  const auto r = parse_document(o.doc, o.synonyms);
  emit(o.out, issues_json(r.issues).dump(2) + "\n");
  return r.ok() ? kOk : kPartial;
}

int cmd_normalize(const Options& o) {
  const auto r = parse_document(o.doc, o.synonyms);
  if (!r.ok()) {
    std::cerr << issues_json(r.issues).dump(2) << '\n';
    return kPartial;
  }
  const auto n = normalizer::apply_defaults(*r.spec, o.seed, r.canonicalized_paths);
  emit(o.out, normalizer::to_json(n).dump(2) + "\n");
  return kOk;
}

int cmd_synth(const Options& o) {
  normalizer::NormalizedSpec n;
  try {
    n = normalizer::normalized_from_json(read_json(o.file));
  } catch (const std::invalid_argument& e) {
    throw ConfigProblem(o.file.string() + ": " + e.what());
  }
  synth::ScenarioTemplate tmpl;
  try {
    tmpl = synth::build_template(n);
  } catch (const synth::CompatibilityError& e) {
    std::cerr << "synth: " << e.what() << '\n';
    return kPartial;
  }
  for (const auto& w : tmpl.warnings) std::cerr << "warning: " << w << '\n';
  const fs::path dir = o.out.value_or(".");
  const auto name = pipeline::artifact_name(tmpl.params.scenario_id);
  write_file_atomic(dir / (name + ".scenic"), synth::render_scenic(tmpl).source_text);
  write_file_atomic(dir / "template.json", synth::template_text(tmpl));
  return kOk;
}

int cmd_sample(const Options& o) {
  if (o.samples < 1) throw ConfigProblem("--samples must be >= 1");
  const auto tmpl = read_template(o.file);
  emit(o.out, sampler::manifest_text(sampler::sample_batch(tmpl, o.samples, o.seed)));
  return kOk;
}

int cmd_simulate(const Options& o) {
  if (o.workers < 1) throw ConfigProblem("--workers must be >= 1");
  const auto tmpl = read_template(o.file);
  std::vector<sampler::ScenarioInstance> instances;
  try {
    instances = sampler::parse_manifest(read_input(o.second));
  } catch (const std::invalid_argument& e) {
    throw ConfigProblem(o.second.string() + ": " + e.what());
  }
  const auto geometry = sim::build_geometry(tmpl);
  const fs::path dir = o.out.value_or("traces");
  pipeline::parallel_for(static_cast<int>(instances.size()), o.workers, [&](int i) {
    const auto& inst = instances[static_cast<std::size_t>(i)];
    write_file_atomic(dir / (std::to_string(inst.instance_seed) + ".jsonl"),
                      sim::trace_text(sim::simulate(tmpl, inst, geometry)));
  });
  return kOk;
}

int cmd_monitor(const Options& o) {
  const auto tmpl = read_template(o.file);
  const auto geometry = sim::build_geometry(tmpl);
  const fs::path dir = o.out.value_or("reports");
  std::vector<std::pair<std::uint64_t, fs::path>> traces;
  for (const auto& t : o.files) traces.emplace_back(seed_of(t), t);
  std::sort(traces.begin(), traces.end());
  std::string summary = monitor::summary_csv_header();
  for (const auto& [seed, path] : traces) {
    const auto trace = pipeline::load_trace(read_input(path), tmpl, geometry, seed);
    const auto report = monitor::monitor(trace, tmpl.params.oracle, geometry);
    write_file_atomic(dir / (std::to_string(seed) + ".json"), monitor::report_text(report));
    summary += monitor::summary_csv_row(report);
  }
  write_file_atomic(dir / "summary.csv", summary);
  return kOk;
}

int cmd_extract(const Options& o) {
  const auto report = [&] {
    try {
      return llm::load_report(o.file);
    } catch (const std::exception& e) {
      throw ConfigProblem(e.what());
    }
  }();
  if (o.offline && !o.transcripts) throw ConfigProblem("--offline needs --transcripts");
  std::unique_ptr<llm::ChatTransport> transport;
  if (o.transcripts) {
    transport = std::make_unique<llm::FixtureTransport>(llm::load_transcripts(*o.transcripts));
  } else {
    transport = std::make_unique<llm::HttpChatTransport>(o.client);
  }
  const auto prompts = o.prompts ? llm::PromptSet::load(*o.prompts) : llm::PromptSet::builtin();
  try {
    const auto result = llm::extract_and_validate(report, *transport, o.client, prompts);
    std::cerr << "extraction attempts: " << result.extraction_attempts
              << ", validation attempts: " << result.validation_attempts << '\n';
    emit(o.out, dsl::serialize_dsl(result.spec));
    return kOk;
  } catch (const llm::ExtractionError& e) {
    std::cerr << e.what() << '\n' << issues_json(e.issues()).dump(2) << '\n';
  } catch (const llm::TransportError& e) {
    std::cerr << e.what() << '\n';
  }
  return kPartial;
}

int cmd_pipeline(const Options& o) {
  pipeline::PipelineConfig c;
  c.inputs = o.files;
  c.out_dir = o.out.value_or("out");
  c.samples = o.samples;
  c.base_seed = o.seed;
  c.workers = o.workers;
  c.offline = o.offline;
  c.synonyms = o.synonyms;
  c.transcripts = o.transcripts;
  c.prompts_dir = o.prompts;
  c.client = o.client;
  try {
    const auto result = pipeline::run_pipeline(c);
    for (const auto& s : result.inputs) {
      if (s.ok) {
        std::cout << s.input << ": " << s.targeted_hits << "/" << s.instances << " targeted hits\n";
      } else {
        std::cout << s.input << ": failed at " << s.failed_stage << ": " << s.message << '\n';
      }
    }
    return result.exit_code();
  } catch (const pipeline::ConfigError& e) {
    throw ConfigProblem(e.what());
  }
}

int cmd_eval_accuracy(const Options& o) {
  std::vector<eval::CorpusCase> corpus;
  try {
    corpus = eval::load_corpus(o.file);
  } catch (const std::exception& e) {
    throw ConfigProblem(e.what());
  }
  if (corpus.empty()) throw ConfigProblem("no cases under " + o.file.string());
  std::vector<eval::ComponentAccuracy> results;
  nlohmann::json detail;
  for (const auto& c : corpus) {
    results.push_back(eval::compare_specs(c.candidate, c.golden));
    detail["cases"][c.case_id] = eval::to_json(results.back());
  }
  const auto agg = eval::aggregate_accuracy(results);
  detail["aggregate"] = eval::to_json(agg);
  if (o.out) {
    write_file_atomic(*o.out / "accuracy.csv", eval::accuracy_csv(agg));
    write_file_atomic(*o.out / "accuracy.json", detail.dump(2) + "\n");
  }
  std::cout << eval::accuracy_csv(agg);
  return kOk;
}

int cmd_eval_kappa(const Options& o) {
  const auto j = read_json(o.file);
  eval::RatingsMatrix m;
  try {
    m.categories = j.at("categories").get<int>();
    m.ratings = j.at("ratings").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigProblem(o.file.string() + ": " + e.what());
  }
  try {
    const auto k = eval::fleiss_kappa(m);
    std::cout << "kappa," << format_sig6(k.kappa) << "\nband," << eval::band_name(k.band) << '\n';
    return kOk;
  } catch (const eval::UndefinedKappa& e) {
    std::cerr << e.what() << '\n';
    return kPartial;
  } catch (const std::invalid_argument& e) {
    throw ConfigProblem(e.what());
  }
}

int cmd_eval_counts(const Options& o) {
  if (!o.expected) throw ConfigProblem("--expected is required");
  std::vector<eval::ExpectedCount> expected;
  try {
    expected = eval::load_expected_counts(*o.expected);
  } catch (const std::exception& e) {
    throw ConfigProblem(e.what());
  }
  std::map<std::string, std::vector<monitor::ViolationReport>> reports;
  for (const auto& e : expected) {
    const fs::path dir = o.file / pipeline::artifact_name(e.road_type) / "reports";
    if (!fs::is_directory(dir)) continue;
    std::vector<std::pair<std::uint64_t, fs::path>> files;
    for (const auto& f : fs::directory_iterator(dir)) files.emplace_back(seed_of(f.path()), f.path());
    std::sort(files.begin(), files.end());
    for (const auto& [seed, path] : files) reports[e.road_type].push_back(monitor::report_from_json(read_json(path)));
  }
  eval::AgreementTable table;
  try {
    table = eval::compare_violation_counts(reports, expected);
  } catch (const std::invalid_argument& e) {
    throw ConfigProblem(e.what());
  }
  emit(o.out, eval::agreement_csv(table));
  const bool all = std::all_of(table.rows.begin(), table.rows.end(), [](const auto& r) { return r.exact_match; });
  return all ? kOk : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crash-report scenario toolkit: DSL, synthesis, sampling, simulation and rule monitoring."};
  app.require_subcommand(1);
  Options o;
  std::function<int()> action;

  const auto add_out = [&](CLI::App* sub, const std::string& help) { sub->add_option("--out", o.out, help); };
  const auto add_synonyms = [&](CLI::App* sub) {
    sub->add_option("--synonyms", o.synonyms, "Synonym table replacing the built-in one")->check(CLI::ExistingFile);
  };
  const auto add_client = [&](CLI::App* sub) {
    sub->add_flag("--offline", o.offline, "Replay fixture transcripts; never open a connection");
    sub->add_option("--transcripts", o.transcripts, "Fixture transcripts {case_id: [reply, ...]}")
        ->check(CLI::ExistingFile);
    sub->add_option("--prompts", o.prompts, "Directory overriding the built-in prompt wording")
        ->check(CLI::ExistingDirectory);
    sub->add_option("--endpoint", o.client.endpoint_url, "Chat-completions URL")->capture_default_str();
    sub->add_option("--model", o.client.model_name, "Model name")->capture_default_str();
    sub->add_option("--api-key-env", o.client.api_key_source, "Environment variable holding the API key")
        ->capture_default_str();
    sub->add_option("--max-retries", o.client.max_retries, "Retries per stage on unparsable replies")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--timeout", o.client.timeout_s, "Request timeout in seconds")->capture_default_str();
    sub->add_option("--max-in-flight", o.client.max_in_flight, "Concurrent request cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  auto* parse = app.add_subcommand("parse", "Parse a DSL document and print its canonical form");
  parse->add_option("doc", o.doc, "DSL document")->required()->check(CLI::ExistingFile);
  add_out(parse, "Write the canonical document here");
  add_synonyms(parse);
  parse->callback([&] { action = [&] { return cmd_parse(o); }; });

  auto* validate = app.add_subcommand("validate", "List the validation issues of a DSL document");
  validate->add_option("doc", o.doc, "DSL document")->required()->check(CLI::ExistingFile);
  add_out(validate, "Write the issue list here");
  add_synonyms(validate);
  validate->callback([&] { action = [&] { return cmd_validate(o); }; });

  auto* normalize = app.add_subcommand("normalize", "Fill defaults and write normalized.json");
  normalize->add_option("doc", o.doc, "DSL document")->required()->check(CLI::ExistingFile);
  normalize->add_option("--seed", o.seed, "Seed for model selection")->capture_default_str();
  add_out(normalize, "Write normalized JSON here");
  add_synonyms(normalize);
  normalize->callback([&] { action = [&] { return cmd_normalize(o); }; });

  auto* synth_cmd = app.add_subcommand("synth", "Compile normalized.json to <id>.scenic and template.json");
  synth_cmd->add_option("normalized", o.file, "normalized.json")->required()->check(CLI::ExistingFile);
  add_out(synth_cmd, "Output directory (default .)");
  synth_cmd->callback([&] { action = [&] { return cmd_synth(o); }; });

  auto* sample = app.add_subcommand("sample", "Sample concrete instances of a template");
  sample->add_option("template", o.file, "template.json")->required()->check(CLI::ExistingFile);
  sample->add_option("--samples,-n", o.samples, "Number of instances")->capture_default_str();
  sample->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  add_out(sample, "Write instances.jsonl here");
  sample->callback([&] { action = [&] { return cmd_sample(o); }; });

  auto* simulate = app.add_subcommand("simulate", "Simulate sampled instances into trace files");
  simulate->add_option("template", o.file, "template.json")->required()->check(CLI::ExistingFile);
  simulate->add_option("instances", o.second, "instances.jsonl")->required()->check(CLI::ExistingFile);
  simulate->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
  add_out(simulate, "Trace directory (default traces)");
  simulate->callback([&] { action = [&] { return cmd_simulate(o); }; });

  auto* monitor_cmd = app.add_subcommand("monitor", "Check traces against the template's rule oracles");
  monitor_cmd->add_option("template", o.file, "template.json")->required()->check(CLI::ExistingFile);
  monitor_cmd->add_option("traces", o.files, "<seed>.jsonl trace files")->required()->check(CLI::ExistingFile);
  add_out(monitor_cmd, "Report directory (default reports)");
  monitor_cmd->callback([&] { action = [&] { return cmd_monitor(o); }; });

  auto* extract = app.add_subcommand("extract", "Extract a DSL document from a crash report");
  extract->add_option("report", o.file, "Crash report JSON")->required()->check(CLI::ExistingFile);
  add_out(extract, "Write the document here");
  add_client(extract);
  extract->callback([&] { action = [&] { return cmd_extract(o); }; });

  auto* pipe = app.add_subcommand("pipeline", "Run every stage for each input");
  pipe->add_option("inputs", o.files, "DSL documents or crash-report JSON files")->required();
  pipe->add_option("--samples,-n", o.samples, "Instances per scenario")->capture_default_str();
  pipe->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  pipe->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
  add_out(pipe, "Output directory (default out)");
  add_synonyms(pipe);
  add_client(pipe);
  pipe->callback([&] { action = [&] { return cmd_pipeline(o); }; });

  auto* eval_cmd = app.add_subcommand("eval", "Scoring and agreement statistics");
  eval_cmd->require_subcommand(1);
  auto* accuracy = eval_cmd->add_subcommand("accuracy", "Score candidate documents against golden ones");
  accuracy->add_option("corpus", o.file, "Directory of <case>/{candidate,golden}.yaml")
      ->required()
      ->check(CLI::ExistingDirectory);
  add_out(accuracy, "Directory for accuracy.csv and accuracy.json");
  accuracy->callback([&] { action = [&] { return cmd_eval_accuracy(o); }; });
  auto* kappa = eval_cmd->add_subcommand("kappa", "Weighted Fleiss kappa of a ratings matrix");
  kappa->add_option("ratings", o.file, "JSON {categories, ratings: [[...], ...]}")->required()->check(CLI::ExistingFile);
  kappa->callback([&] { action = [&] { return cmd_eval_kappa(o); }; });
  auto* counts = eval_cmd->add_subcommand("counts", "Compare distinct violation counts with expected counts");
  counts->add_option("runs", o.file, "Pipeline output directory")->required()->check(CLI::ExistingDirectory);
  counts->add_option("--expected", o.expected, "Expected counts CSV")->required()->check(CLI::ExistingFile);
  add_out(counts, "Write the agreement CSV here");
  counts->callback([&] { action = [&] { return cmd_eval_counts(o); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    return action();
  } catch (const ConfigProblem& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPartial;
  }
}
