#include "scenforge/llm/extractor.hpp"

#include <cstdlib>
#include <regex>
#include <sstream>

#include "httplib.h"
#include "scenforge/common/io.hpp"
#include "scenforge/common/number_format.hpp"
#include "scenforge/dsl/vocab.hpp"
#include "scenforge/embedded/exemplars.hpp"
#include "scenforge/embedded/extraction_system.hpp"
#include "scenforge/embedded/schema.hpp"
#include "scenforge/embedded/validation_system.hpp"

namespace scenforge::llm {
namespace {

using nlohmann::json;

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

std::vector<Exemplar> parse_exemplars(std::string_view text) {
  std::vector<Exemplar> out;
  for (const auto& e : json::parse(text)) {
    out.push_back({e.at("report_excerpt").get<std::string>(), e.at("golden_dsl").get<std::string>()});
  }
  return out;
}

std::string supported_rules_text() {
  std::string out;
  for (int id : dsl::supported_rule_ids()) {
    if (!out.empty()) out += ", ";
    out += dsl::cvc_key(id);
  }
  return out;
}

template <typename E>
void list_vocabulary(std::ostringstream& o) {
  o << "- " << dsl::vocabulary_name<E>() << ":";
  bool first = true;
  for (const auto& token : dsl::all_tokens<E>()) {
    o << (first ? " " : " | ") << token;
    first = false;
  }
  o << '\n';
}

std::vector<PromptPart> report_parts(const CrashReport& report) {
  std::vector<PromptPart> parts;
  parts.push_back({"Crash summary (case " + report.case_id + "):\n" + report.summary_text, std::nullopt});
  if (report.sketch) parts.push_back({"", report.sketch});
  if (!report.rule_context.empty()) {
    std::string rules = "Relevant regulations:";
    for (const auto& r : report.rule_context) rules += "\n- " + r;
    parts.push_back({rules, std::nullopt});
  }
  return parts;
}

std::string number_text(double v) { return format_shortest(v); }

void actor_checks(std::vector<std::pair<std::string, std::string>>& out, const std::string& prefix,
                  const dsl::ActorSpec& a, bool npc) {
  if (npc) out.emplace_back(prefix + ".actor_id", a.actor_id);
  out.emplace_back(prefix + ".actor_type", std::string(dsl::to_token(a.actor_type)));
  out.emplace_back(prefix + ".behavior", std::string(dsl::to_token(a.behavior)));
  if (a.speed_mps) out.emplace_back(prefix + ".speed_mps", number_text(*a.speed_mps));
  if (a.model_id) out.emplace_back(prefix + ".model_id", *a.model_id);
  if (a.position) {
    out.emplace_back(prefix + ".position.reference", a.position->reference);
    out.emplace_back(prefix + ".position.spatial_relation", std::string(dsl::to_token(a.position->spatial_relation)));
    if (a.position->heading_relation) {
      out.emplace_back(prefix + ".position.heading_relation", std::string(dsl::to_token(*a.position->heading_relation)));
    }
  }
}

std::vector<std::pair<std::string, std::string>> field_checks(const dsl::ScenarioSpec& s) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("environment.weather", std::string(dsl::to_token(s.environment.weather)));
  out.emplace_back("environment.time_of_day", std::string(dsl::to_token(s.environment.time_of_day)));
  if (s.environment.time_hour) out.emplace_back("environment.time_hour", std::to_string(*s.environment.time_hour));
  const auto& r = s.road_network;
  out.emplace_back("road_network.road_type", std::string(dsl::to_token(r.road_type)));
  out.emplace_back("road_network.number_of_ways", std::to_string(r.number_of_ways));
  out.emplace_back("road_network.number_of_lanes", std::to_string(r.number_of_lanes));
  out.emplace_back("road_network.road_markers", std::string(dsl::to_token(r.road_markers)));
  std::string signs = "[";
  for (std::size_t i = 0; i < r.traffic_signs.size(); ++i) {
    signs += (i ? ", " : "") + std::string(dsl::to_token(r.traffic_signs[i]));
  }
  out.emplace_back("road_network.traffic_signs", signs + "]");
  if (r.speed_limit_value) out.emplace_back("road_network.speed_limit_value", number_text(*r.speed_limit_value));
  actor_checks(out, "actors.ego", s.actors.ego, false);
  for (std::size_t i = 0; i < s.actors.npcs.size(); ++i) {
    actor_checks(out, "actors.npcs[" + std::to_string(i) + "]", s.actors.npcs[i], true);
  }
  for (std::size_t i = 0; i < s.oracle.size(); ++i) {
    const auto& e = s.oracle[i];
    const std::string p = "oracle[" + std::to_string(i) + "]";
    out.emplace_back(p + ".rule", dsl::cvc_key(e.rule_id));
    out.emplace_back(p + ".violation_type", e.violation_type);
    if (e.violating_actor) out.emplace_back(p + ".violating_actor", *e.violating_actor);
  }
  return out;
}

json text_part(const std::string& text) { return {{"type", "text"}, {"text", text}}; }

}  // namespace

CrashReport report_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    CrashReport r;
    r.case_id = j.at("case_id").get<std::string>();
    r.summary_text = j.at("summary_text").get<std::string>();
    if (r.case_id.empty()) throw std::invalid_argument("case_id is empty");
    if (r.summary_text.empty()) throw std::invalid_argument("summary_text is empty");
    if (j.contains("sketch")) {
      const auto& s = j["sketch"];
      std::filesystem::path p = s.at("path").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      r.sketch = ImagePayload{read_text_file(p), s.at("media_type").get<std::string>()};
    }
    if (j.contains("rule_context")) r.rule_context = j["rule_context"].get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed crash report: ") + e.what());
  }
}

CrashReport load_report(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return report_from_json(j, path.parent_path());
}

const PromptSet& PromptSet::builtin() {
  static const PromptSet set{std::string(embedded::kExtractionSystemTxt), std::string(embedded::kValidationSystemTxt),
                             std::string(embedded::kSchemaTxt), parse_exemplars(embedded::kExemplarsJson)};
  return set;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  return {read_text_file(dir / "extraction_system.txt"), read_text_file(dir / "validation_system.txt"),
          read_text_file(dir / "schema.txt"), parse_exemplars(read_text_file(dir / "exemplars.json"))};
}

std::string vocabulary_listing() {
  std::ostringstream o;
  list_vocabulary<dsl::Weather>(o);
  list_vocabulary<dsl::TimeOfDay>(o);
  list_vocabulary<dsl::RoadType>(o);
  list_vocabulary<dsl::RoadMarker>(o);
  list_vocabulary<dsl::TrafficSign>(o);
  list_vocabulary<dsl::ActorType>(o);
  list_vocabulary<dsl::Behavior>(o);
  list_vocabulary<dsl::SpatialRelation>(o);
  list_vocabulary<dsl::HeadingRelation>(o);
  return o.str();
}

PromptBundle build_extraction_prompt(const CrashReport& report, const PromptSet& prompts) {
  PromptBundle b;
  b.system_text = replace_all(prompts.extraction_system, "{{schema}}", prompts.schema);
  b.system_text = replace_all(b.system_text, "{{vocabulary}}", vocabulary_listing());
  b.system_text = replace_all(b.system_text, "{{rules}}", supported_rules_text());
  b.exemplars = prompts.exemplars;
  b.user_parts = report_parts(report);
  return b;
}

PromptBundle build_validation_prompt(const dsl::ScenarioSpec& draft, const CrashReport& report,
                                     const PromptSet& prompts) {
  PromptBundle b;
  b.system_text = replace_all(prompts.validation_system, "{{vocabulary}}", vocabulary_listing());
  b.user_parts.push_back({"Draft document:\n" + dsl::serialize_dsl(draft), std::nullopt});
  std::string checks = "Field checks:";
  for (const auto& [path, value] : field_checks(draft)) checks += "\nCHECK " + path + " = " + value;
  b.user_parts.push_back({checks, std::nullopt});
  for (auto& p : report_parts(report)) b.user_parts.push_back(std::move(p));
  return b;
}

json chat_request_json(const PromptBundle& bundle, const std::string& model) {
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", bundle.system_text}});
  for (const auto& e : bundle.exemplars) {
    messages.push_back({{"role", "user"}, {"content", e.report_excerpt}});
    messages.push_back({{"role", "assistant"}, {"content", e.golden_dsl}});
  }
  json content = json::array();
  for (const auto& p : bundle.user_parts) {
    if (p.is_image()) {
      const std::string url = "data:" + p.image->media_type + ";base64," + httplib::detail::base64_encode(p.image->bytes);
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    } else {
      content.push_back(text_part(p.text));
    }
  }
  messages.push_back({{"role", "user"}, {"content", content}});
  return {{"model", model}, {"messages", messages}, {"temperature", 0}};
}

std::string chat_reply_text(const json& response) {
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("unexpected chat response: ") + e.what());
  }
}

HttpChatTransport::HttpChatTransport(ClientConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint_url, m, url_re)) {
    throw std::invalid_argument("endpoint must be an http(s) URL: " + config_.endpoint_url);
  }
  origin_ = m[1];
  path_ = m[2].matched ? std::string(m[2]) : "/v1/chat/completions";
}

std::string HttpChatTransport::complete(const std::string& case_id, const PromptBundle& bundle) {
  httplib::Headers headers;
  if (!config_.api_key_source.empty()) {
    if (const char* key = std::getenv(config_.api_key_source.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string body = chat_request_json(bundle, config_.model_name).dump();

  in_flight_.acquire();
  httplib::Result res;
  try {
    httplib::Client client(origin_);
    const auto sec = static_cast<time_t>(config_.timeout_s);
    const auto usec = static_cast<time_t>((config_.timeout_s - static_cast<double>(sec)) * 1e6);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    res = client.Post(path_, headers, body, "application/json");
  } catch (const std::exception& e) {
    in_flight_.release();
    throw TransportError(case_id, e.what());
  }
  in_flight_.release();

  if (!res) throw TransportError(case_id, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError(case_id, "HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    return chat_reply_text(json::parse(res->body));
  } catch (const std::exception& e) {
    throw TransportError(case_id, e.what());
  }
}

Transcripts load_transcripts(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path)).get<Transcripts>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

FixtureTransport::FixtureTransport(Transcripts transcripts) : transcripts_(std::move(transcripts)) {}

FixtureTransport FixtureTransport::load(const std::filesystem::path& path) {
  return FixtureTransport(load_transcripts(path));
}

std::string FixtureTransport::complete(const std::string& case_id, const PromptBundle& bundle) {
  std::lock_guard lock(mutex_);
  auto& log = sent_[case_id];
  log.push_back(bundle);
  const auto it = transcripts_.find(case_id);
  if (it == transcripts_.end()) throw TransportError(case_id, "no fixture transcript");
  if (log.size() > it->second.size()) throw TransportError(case_id, "fixture transcript exhausted");
  return it->second[log.size() - 1];
}

int FixtureTransport::calls(const std::string& case_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sent_.find(case_id);
  return it == sent_.end() ? 0 : static_cast<int>(it->second.size());
}

std::vector<PromptBundle> FixtureTransport::sent(const std::string& case_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sent_.find(case_id);
  return it == sent_.end() ? std::vector<PromptBundle>{} : it->second;
}

ExtractionError::ExtractionError(std::string case_id, std::string stage, int attempts,
                                 std::vector<dsl::ValidationIssue> issues)
    : std::runtime_error(case_id + ": " + stage + " failed after " + std::to_string(attempts) + " attempt(s)"),
      case_id_(std::move(case_id)),
      stage_(std::move(stage)),
      attempts_(attempts),
      issues_(std::move(issues)) {}

std::string strip_fences(const std::string& reply) {
  static const std::regex fence_re(R"(```[A-Za-z0-9_-]*[ \t]*\r?\n([\s\S]*?)```)");
  std::smatch m;
  std::string body = std::regex_search(reply, m, fence_re) ? std::string(m[1]) : reply;
  const auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = body.find_last_not_of(" \t\r\n");
  return body.substr(first, last - first + 1) + "\n";
}

std::string issues_feedback(const std::vector<dsl::ValidationIssue>& issues) {
  std::string out = "Your previous reply was rejected. Fix these issues and reply with the whole document:";
  for (const auto& i : issues) {
    out += "\n- " + i.path + ": " + std::string(dsl::issue_kind_name(i.kind)) + ": " + i.message;
    if (!i.allowed.empty()) {
      out += " (allowed:";
      for (const auto& a : i.allowed) out += " " + a;
      out += ")";
    }
  }
  return out;
}

namespace {

struct StageResult {
  dsl::ScenarioSpec spec;
  std::string document;
  int attempts = 0;
};

StageResult run_stage(const std::string& stage, const CrashReport& report, const PromptBundle& base,
                      ChatTransport& transport, int max_retries) {
  std::vector<dsl::ValidationIssue> issues;
  for (int attempt = 1; attempt <= max_retries + 1; ++attempt) {
    PromptBundle bundle = base;
    if (!issues.empty()) bundle.user_parts.push_back({issues_feedback(issues), std::nullopt});
    const std::string document = strip_fences(transport.complete(report.case_id, bundle));
    auto parsed = dsl::parse_dsl(document);
    if (parsed.ok()) return {std::move(*parsed.spec), document, attempt};
    issues = std::move(parsed.issues);
    if (issues.empty()) issues.push_back({"", dsl::IssueKind::missing_section, "reply is not a document", {}});
  }
  throw ExtractionError(report.case_id, stage, max_retries + 1, std::move(issues));
}

}  // namespace

ExtractionResult extract_and_validate(const CrashReport& report, ChatTransport& transport, const ClientConfig& config,
                                      const PromptSet& prompts) {
  if (config.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  auto draft = run_stage("extraction", report, build_extraction_prompt(report, prompts), transport, config.max_retries);
  auto checked = run_stage("validation", report, build_validation_prompt(draft.spec, report, prompts), transport,
                           config.max_retries);
  return {std::move(checked.spec), std::move(checked.document), draft.attempts, checked.attempts};
}

}  // namespace scenforge::llm
