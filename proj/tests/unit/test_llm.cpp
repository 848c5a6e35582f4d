#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "scenforge/common/io.hpp"
#include "scenforge/llm/extractor.hpp"

using namespace scenforge;
using namespace scenforge::llm;

namespace {

const std::string kFixtures = std::string(SCENFORGE_DATA_DIR) + "/fixtures/extraction";

CrashReport report(const std::string& id) { return load_report(kFixtures + "/reports/" + id + ".json"); }

FixtureTransport transcripts() { return FixtureTransport::load(kFixtures + "/transcripts.json"); }

int count_lines_with_prefix(const std::string& text, const std::string& prefix) {
  int n = 0;
  std::size_t pos = 0;
  while ((pos = text.find("\n" + prefix, pos)) != std::string::npos) {
    ++n;
    ++pos;
  }
  return n;
}

std::string all_text(const PromptBundle& b) {
  std::string out;
  for (const auto& p : b.user_parts) out += "\n" + p.text;
  return out;
}

}  // namespace

TEST_CASE("report loading") {
  const auto r = report("case_success");
  CHECK(r.case_id == "case_success");
  REQUIRE(r.sketch);
  CHECK(r.sketch->media_type == "image/png");
  CHECK(r.sketch->bytes.substr(1, 3) == "PNG");
  CHECK(r.rule_context.size() == 1);
  CHECK_THROWS_AS(report_from_json(nlohmann::json{{"case_id", "x"}, {"summary_text", ""}}), std::invalid_argument);
  CHECK_THROWS_AS(report_from_json(nlohmann::json{{"summary_text", "x"}}), std::invalid_argument);
}

TEST_CASE("extraction prompt") {
  const auto with_sketch = report("case_success");
  const auto b = build_extraction_prompt(with_sketch);

  for (const char* w : {"sunny", "cloudy", "overcast", "rainy", "snowy", "foggy", "windy", "not_mentioned"}) {
    CHECK(b.system_text.find(w) != std::string::npos);
  }
  CHECK(b.system_text.find(PromptSet::builtin().schema) != std::string::npos);
  CHECK(b.system_text.find("{{") == std::string::npos);
  CHECK(b.system_text.find("CVC_22450") != std::string::npos);

  REQUIRE(b.user_parts.size() == 3);
  CHECK(b.user_parts[0].text.find(with_sketch.summary_text) != std::string::npos);
  CHECK(b.user_parts[1].is_image());
  CHECK(b.user_parts[2].text.find(with_sketch.rule_context[0]) != std::string::npos);
  CHECK(std::count_if(b.user_parts.begin(), b.user_parts.end(), [](const PromptPart& p) { return p.is_image(); }) == 1);

  const auto no_sketch = build_extraction_prompt(report("case_retry"));
  CHECK(std::none_of(no_sketch.user_parts.begin(), no_sketch.user_parts.end(),
                     [](const PromptPart& p) { return p.is_image(); }));

  CHECK(build_extraction_prompt(with_sketch) == b);

  REQUIRE(b.exemplars.size() >= 2);
  for (const auto& e : b.exemplars) {
    const auto parsed = dsl::parse_dsl(e.golden_dsl);
    CHECK(parsed.ok());
    CHECK_FALSE(e.report_excerpt.empty());
  }
}

TEST_CASE("validation prompt enumerates draft fields") {
  const auto r = report("case_success");
  auto t = transcripts();
  const auto draft = dsl::parse_dsl(strip_fences(t.complete("case_success", {})));
  REQUIRE(draft.ok());
  const auto b = build_validation_prompt(*draft.spec, r);
  const auto text = all_text(b);

  // Environment: weather, time_of_day. Road: type, ways, lanes, markers, signs.
  CHECK(count_lines_with_prefix(text, "CHECK environment.") == 2);
  CHECK(count_lines_with_prefix(text, "CHECK road_network.") == 5);
  CHECK(count_lines_with_prefix(text, "CHECK actors.npcs[0].") == 6);
  CHECK(count_lines_with_prefix(text, "CHECK oracle[0].") == 3);
  // The draft says sunny while the summary reports rain.
  CHECK(text.find("\nCHECK environment.weather = sunny") != std::string::npos);
  CHECK(r.summary_text.find("rain") != std::string::npos);
  CHECK(text.find(dsl::serialize_dsl(*draft.spec)) != std::string::npos);
  CHECK(std::count_if(b.user_parts.begin(), b.user_parts.end(), [](const PromptPart& p) { return p.is_image(); }) == 1);
  CHECK(build_validation_prompt(*draft.spec, r) == b);

  auto with_limit = *draft.spec;
  with_limit.road_network.traffic_signs = {dsl::TrafficSign::speed_limit_sign};
  with_limit.road_network.speed_limit_value = 11.18;
  const auto text2 = all_text(build_validation_prompt(with_limit, r));
  CHECK(count_lines_with_prefix(text2, "CHECK road_network.") == 6);
  CHECK(text2.find("\nCHECK road_network.speed_limit_value = 11.18") != std::string::npos);
  CHECK(text2.find("\nCHECK road_network.traffic_signs = [speed_limit_sign]") != std::string::npos);
}

TEST_CASE("fence stripping") {
  CHECK(strip_fences("```yaml\na: 1\n```") == "a: 1\n");
  CHECK(strip_fences("text\n```\na: 1\nb: 2\n```\nmore") == "a: 1\nb: 2\n");
  CHECK(strip_fences("  a: 1  \n\n") == "a: 1\n");
  CHECK(strip_fences("") == "");
}

TEST_CASE("chat request body") {
  PromptBundle b;
  b.system_text = "sys";
  b.exemplars = {{"excerpt", "doc"}};
  b.user_parts = {{"summary", std::nullopt}, {"", ImagePayload{"abc", "image/png"}}};
  const auto j = chat_request_json(b, "m");
  CHECK(j["model"] == "m");
  REQUIRE(j["messages"].size() == 4);
  CHECK(j["messages"][0]["role"] == "system");
  CHECK(j["messages"][1]["role"] == "user");
  CHECK(j["messages"][2]["role"] == "assistant");
  CHECK(j["messages"][2]["content"] == "doc");
  const auto& content = j["messages"][3]["content"];
  CHECK(content[0]["type"] == "text");
  CHECK(content[1]["image_url"]["url"] == "data:image/png;base64,YWJj");

  CHECK(chat_reply_text(nlohmann::json::parse(R"({"choices":[{"message":{"content":"x"}}]})")) == "x");
  CHECK_THROWS_AS(chat_reply_text(nlohmann::json::parse(R"({"choices":[]})")), std::invalid_argument);
}

TEST_CASE("offline extraction: success") {
  auto t = transcripts();
  const auto result = extract_and_validate(report("case_success"), t, {});
  CHECK(result.extraction_attempts == 1);
  CHECK(result.validation_attempts == 1);
  CHECK(result.retries() == 0);
  CHECK(result.spec.environment.weather == dsl::Weather::rainy);
  CHECK(dsl::validate_spec(result.spec).empty());
  CHECK(dsl::parse_dsl(result.document).ok());
  CHECK(t.calls("case_success") == 2);
  // The validation call carries the draft's field checks.
  CHECK(all_text(t.sent("case_success")[1]).find("CHECK environment.weather = sunny") != std::string::npos);
}

TEST_CASE("offline extraction: retry then success") {
  auto t = transcripts();
  const auto result = extract_and_validate(report("case_retry"), t, {});
  CHECK(result.extraction_attempts == 2);
  CHECK(result.retries() == 1);
  CHECK(result.spec.actors.ego.behavior == dsl::Behavior::static_);
  CHECK(dsl::validate_spec(result.spec).empty());
  const auto sent = t.sent("case_retry");
  REQUIRE(sent.size() == 3);
  CHECK(all_text(sent[0]).find("rejected") == std::string::npos);
  const auto feedback = sent[1].user_parts.back().text;
  CHECK(feedback.find("/actors/ego/behavior") != std::string::npos);
  CHECK(feedback.find("parked") != std::string::npos);
}

TEST_CASE("offline extraction: exhaustion") {
  auto t = transcripts();
  ClientConfig config;
  config.max_retries = 2;
  try {
    extract_and_validate(report("case_exhausted"), t, config);
    FAIL("expected ExtractionError");
  } catch (const ExtractionError& e) {
    CHECK(e.case_id() == "case_exhausted");
    CHECK(e.stage() == "extraction");
    CHECK(e.attempts() == 3);
    CHECK_FALSE(e.issues().empty());
  }
  CHECK(t.calls("case_exhausted") == 3);

  auto t0 = transcripts();
  config.max_retries = 0;
  CHECK_THROWS_AS(extract_and_validate(report("case_retry"), t0, config), ExtractionError);
  CHECK(t0.calls("case_retry") == 1);

  auto t1 = transcripts();
  CHECK_THROWS_AS(t1.complete("unknown_case", {}), TransportError);
}

TEST_CASE("http transport against a local endpoint") {
  httplib::Server server;
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  std::atomic<int> requests{0};
  std::string seen_auth;
  bool saw_image = false;
  std::mutex seen_mutex;
  const std::string doc = read_text_file(kFixtures + "/transcripts.json");
  const auto replies = nlohmann::json::parse(doc)["case_success"];

  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int now = ++active;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    const auto body = nlohmann::json::parse(req.body);
    {
      std::lock_guard lock(seen_mutex);
      seen_auth = req.get_header_value("Authorization");
      for (const auto& part : body["messages"].back()["content"]) {
        if (part["type"] == "image_url") saw_image = true;
      }
    }
    const int n = requests++;
    const std::string reply = body["model"] == "fail" ? "" : replies[n % 2].get<std::string>();
    --active;
    if (body["model"] == "fail") {
      res.status = 500;
      res.set_content("boom", "text/plain");
      return;
    }
    res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("SCENFORGE_TEST_KEY", "secret-token", 1);
  ClientConfig config;
  config.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.api_key_source = "SCENFORGE_TEST_KEY";
  config.timeout_s = 5;

  SUBCASE("round trip") {
    HttpChatTransport http(config);
    const auto result = extract_and_validate(report("case_success"), http, config);
    CHECK(result.spec.environment.weather == dsl::Weather::rainy);
    CHECK(seen_auth == "Bearer secret-token");
    CHECK(saw_image);
  }
  SUBCASE("server error carries the case id") {
    config.model_name = "fail";
    HttpChatTransport http(config);
    try {
      http.complete("case_x", {});
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.case_id() == "case_x");
      CHECK(std::string(e.what()).find("500") != std::string::npos);
    }
  }
  SUBCASE("in-flight cap") {
    config.max_in_flight = 2;
    HttpChatTransport http(config);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&http] { http.complete("case_success", {}); });
    }
    for (auto& th : threads) th.join();
    CHECK(peak.load() <= 2);
    CHECK(requests.load() == 8);
  }

  server.stop();
  worker.join();
}

TEST_CASE("unreachable endpoint") {
  ClientConfig config;
  config.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
  config.timeout_s = 1;
  HttpChatTransport http(config);
  CHECK_THROWS_AS(http.complete("case_y", {}), TransportError);
  CHECK_THROWS_AS(HttpChatTransport(ClientConfig{"ftp://x", "m", "", 0, 1, 1}), std::invalid_argument);
}
