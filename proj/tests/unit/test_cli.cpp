#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "scenforge/common/digest.hpp"
#include "scenforge/common/io.hpp"

using namespace scenforge;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SCENFORGE_DATA_DIR;
const fs::path kRoadTypeFixtures = kData / "fixtures" / "road_types";
const fs::path kExtraction = kData / "fixtures" / "extraction";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("scenforge_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(SCENFORGE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::map<std::string, std::uint64_t> tree_digest(const fs::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = fnv1a64(read_text_file(e.path()));
  }
  return out;
}

}  // namespace

TEST_CASE("exit codes") {
  TempDir tmp("codes");
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("bogus") == 2);
  CHECK(run("parse " + q(tmp.path / "missing.yaml")) == 2);
  CHECK(run("sample " + q(kRoadTypeFixtures / "curve.yaml") + " -n notanumber") == 2);
  CHECK(run("parse " + q(kRoadTypeFixtures / "curve.yaml")) == 0);
  CHECK(run("validate " + q(kRoadTypeFixtures / "curve.yaml")) == 0);

  write_file_atomic(tmp.path / "bad.yaml", "environment:\n  weather: hail\n");
  CHECK(run("validate " + q(tmp.path / "bad.yaml")) == 1);
  CHECK(run("pipeline " + q(kRoadTypeFixtures / "curve.yaml") + " -n 0 --out " + q(tmp.path / "o")) == 2);
  CHECK(run("pipeline " + q(kRoadTypeFixtures / "curve.yaml") + " " + q(tmp.path / "bad.yaml") + " -n 2 --out " +
            q(tmp.path / "o")) == 1);
  CHECK(run("pipeline " + q(kRoadTypeFixtures / "curve.yaml") + " -n 2 --out " + q(tmp.path / "o")) == 0);
  CHECK(run("extract " + q(kExtraction / "reports" / "case_success.json") + " --offline") == 2);
  CHECK(run("extract " + q(kExtraction / "reports" / "case_exhausted.json") + " --offline --transcripts " +
            q(kExtraction / "transcripts.json")) == 1);
}

TEST_CASE("separate stage commands reproduce the pipeline output") {
  TempDir tmp("stages");
  const auto p = tmp.path / "p";
  const auto s = tmp.path / "s";
  REQUIRE(run("pipeline " + q(kRoadTypeFixtures / "intersection_2.yaml") + " -n 6 --seed 11 --workers 3 --out " + q(p)) == 0);
  REQUIRE(run("parse " + q(kRoadTypeFixtures / "intersection_2.yaml") + " --out " + q(s / "scenario.yaml")) == 0);
  REQUIRE(run("normalize " + q(s / "scenario.yaml") + " --seed 11 --out " + q(s / "normalized.json")) == 0);
  REQUIRE(run("synth " + q(s / "normalized.json") + " --out " + q(s)) == 0);
  REQUIRE(run("sample " + q(s / "template.json") + " -n 6 --seed 11 --out " + q(s / "instances.jsonl")) == 0);
  REQUIRE(run("simulate " + q(s / "template.json") + " " + q(s / "instances.jsonl") + " --out " + q(s / "traces")) ==
          0);
  std::string traces;
  for (const auto& e : fs::directory_iterator(s / "traces")) traces += " " + q(e.path());
  REQUIRE(run("monitor " + q(s / "template.json") + traces + " --out " + q(s / "reports")) == 0);

  const auto summary = read_text_file(s / "reports" / "summary.csv");
  fs::remove(s / "reports" / "summary.csv");
  CHECK(tree_digest(s) == tree_digest(p / "intersection_2"));
  CHECK(summary == read_text_file(p / "summary.csv"));
}

TEST_CASE("eval subcommands") {
  TempDir tmp("eval");
  CHECK(run("eval accuracy " + q(kData / "accuracy_corpus") + " --out " + q(tmp.path)) == 0);
  CHECK(read_text_file(tmp.path / "accuracy.csv").find("overall,792,800,0.99") != std::string::npos);
  write_file_atomic(tmp.path / "unanimous.json", R"({"categories": 3, "ratings": [[1,1],[1,1]]})");
  CHECK(run("eval kappa " + q(tmp.path / "unanimous.json")) == 1);
  CHECK(run("eval counts " + q(tmp.path) + " --expected " + q(kData / "road_type_counts.csv")) == 2);
}
