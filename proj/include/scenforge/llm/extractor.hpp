#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenforge/dsl/document.hpp"
#include "scenforge/dsl/spec.hpp"

namespace scenforge::llm {

struct ImagePayload {
  std::string bytes;
  std::string media_type;

  bool operator==(const ImagePayload&) const = default;
};

struct CrashReport {
  std::string case_id;
  std::string summary_text;
  std::optional<ImagePayload> sketch;
  std::vector<std::string> rule_context;  // CVC excerpts
};

/// Reads {"case_id", "summary_text", "sketch": {"path", "media_type"},
/// "rule_context": [...]}; a relative sketch path resolves against the
/// report file's directory. Throws std::invalid_argument on malformed input.
CrashReport load_report(const std::filesystem::path& path);
CrashReport report_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct PromptPart {
  std::string text;
  std::optional<ImagePayload> image;  // set for image parts; text is empty then

  bool is_image() const { return image.has_value(); }
  bool operator==(const PromptPart&) const = default;
};

struct Exemplar {
  std::string report_excerpt;
  std::string golden_dsl;

  bool operator==(const Exemplar&) const = default;
};

struct PromptBundle {
  std::string system_text;
  std::vector<PromptPart> user_parts;
  std::vector<Exemplar> exemplars;

  bool operator==(const PromptBundle&) const = default;
};

/// Prompt wording. The built-in set is compiled from data/prompts; a
/// directory with the same file names replaces it without a rebuild.
struct PromptSet {
  std::string extraction_system;
  std::string validation_system;
  std::string schema;
  std::vector<Exemplar> exemplars;

  static const PromptSet& builtin();
  static PromptSet load(const std::filesystem::path& dir);
};

/// One "- <vocabulary>: a | b | ..." line per closed vocabulary.
std::string vocabulary_listing();

PromptBundle build_extraction_prompt(const CrashReport& report, const PromptSet& prompts = PromptSet::builtin());

/// One "CHECK <path> = <value>" line per leaf field of the draft.
PromptBundle build_validation_prompt(const dsl::ScenarioSpec& draft, const CrashReport& report,
                                     const PromptSet& prompts = PromptSet::builtin());

class TransportError : public std::runtime_error {
 public:
  TransportError(std::string case_id, const std::string& message)
      : std::runtime_error(case_id + ": " + message), case_id_(std::move(case_id)) {}
  const std::string& case_id() const { return case_id_; }

 private:
  std::string case_id_;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// Returns the assistant reply text. Throws TransportError.
  virtual std::string complete(const std::string& case_id, const PromptBundle& bundle) = 0;
};

struct ClientConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string model_name = "gpt-4o-mini";
  std::string api_key_source = "OPENAI_API_KEY";
  int max_retries = 2;
  double timeout_s = 60.0;
  int max_in_flight = 4;
};

/// OpenAI-compatible request body: system message, exemplar pairs as
/// user/assistant turns, then the report parts with images as base64 data URLs.
nlohmann::json chat_request_json(const PromptBundle& bundle, const std::string& model);

/// First choice's message content. Throws std::invalid_argument.
std::string chat_reply_text(const nlohmann::json& response);

class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(ClientConfig config);
  std::string complete(const std::string& case_id, const PromptBundle& bundle) override;

 private:
  ClientConfig config_;
  std::string origin_;
  std::string path_;
  std::counting_semaphore<> in_flight_;
};

using Transcripts = std::map<std::string, std::vector<std::string>>;

/// Reads {case_id: [reply, ...]}; throws std::invalid_argument.
Transcripts load_transcripts(const std::filesystem::path& path);

/// Replays transcripts {case_id: [reply, ...]}; the n-th call for a case
/// returns its n-th reply. Never touches the network.
class FixtureTransport : public ChatTransport {
 public:
  explicit FixtureTransport(Transcripts transcripts);
  static FixtureTransport load(const std::filesystem::path& path);

  std::string complete(const std::string& case_id, const PromptBundle& bundle) override;
  int calls(const std::string& case_id) const;
  /// Every bundle sent, in call order.
  std::vector<PromptBundle> sent(const std::string& case_id) const;

 private:
  Transcripts transcripts_;
  std::map<std::string, std::vector<PromptBundle>> sent_;
  mutable std::mutex mutex_;
};

class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(std::string case_id, std::string stage, int attempts, std::vector<dsl::ValidationIssue> issues);
  const std::string& case_id() const { return case_id_; }
  const std::string& stage() const { return stage_; }
  int attempts() const { return attempts_; }
  const std::vector<dsl::ValidationIssue>& issues() const { return issues_; }

 private:
  std::string case_id_;
  std::string stage_;
  int attempts_;
  std::vector<dsl::ValidationIssue> issues_;
};

struct ExtractionResult {
  dsl::ScenarioSpec spec;
  std::string document;  // the accepted reply, fences removed
  int extraction_attempts = 0;
  int validation_attempts = 0;

  int retries() const { return extraction_attempts - 1 + validation_attempts - 1; }
};

/// Content of the first ``` fenced block if any, else the trimmed text.
std::string strip_fences(const std::string& reply);

/// Issue list appended to a retry prompt.
std::string issues_feedback(const std::vector<dsl::ValidationIssue>& issues);

/// Extraction then validation, each retried with the parse issues appended
/// until the reply parses cleanly or max_retries is spent. Throws
/// ExtractionError when a stage exhausts its attempts; TransportError passes
/// through.
ExtractionResult extract_and_validate(const CrashReport& report, ChatTransport& transport, const ClientConfig& config,
                                      const PromptSet& prompts = PromptSet::builtin());

}  // namespace scenforge::llm
