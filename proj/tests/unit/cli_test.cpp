#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mudscope/parser.hpp"
#include "mudscope_cli/cli.hpp"
#include "support/oracles.hpp"

using namespace mudscope;
using namespace mudscope::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run runCli(std::vector<std::string> args) {
  args.insert(args.begin(), "mudscope");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratchDir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mudscope-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("validate exit codes") {
  CHECK(runCli({"validate", fixturePath("minimal.json")}).code == cli::kOk);
  CHECK(runCli({"validate", fixturePath("warnings.json")}).code == cli::kOk);
  CHECK(runCli({"validate", fixturePath("malformed.json")}).code == cli::kValidationFailed);
  CHECK(runCli({"validate", fixturePath("unresolved-acl.json")}).code == cli::kValidationFailed);

  // A missing path outranks validation errors in the same run.
  const auto mixed =
      runCli({"validate", fixturePath("malformed.json"), fixturePath("no-such-file.json")});
  CHECK(mixed.code == cli::kUsage);
  CHECK(mixed.out.find("FileNotFound") != std::string::npos);

  CHECK(runCli({"validate"}).code == cli::kUsage);
  CHECK(runCli({"frobnicate"}).code == cli::kUsage);
}

TEST_CASE("validate json lines") {
  const auto r = runCli({"validate", "--json", fixturePath("minimal.json"), fixturePath("warnings.json")});
  std::istringstream lines(r.out);
  std::vector<json> docs;
  for (std::string line; std::getline(lines, line);) docs.push_back(json::parse(line));
  REQUIRE(docs.size() == 2);
  CHECK(docs[0]["ok"] == true);
  CHECK(docs[1]["items"].size() == 4);
}

TEST_CASE("fmt") {
  const auto dir = scratchDir("fmt");
  const auto target = dir / "string-port.json";
  fs::copy_file(fixturePath("string-port.json"), target);

  CHECK(runCli({"validate", target.string()}).code == cli::kValidationFailed);
  CHECK(runCli({"fmt", "--check", target.string()}).code == cli::kValidationFailed);
  const auto printed = runCli({"fmt", target.string()});
  CHECK(printed.code == cli::kOk);
  CHECK(parseMudFile(printed.out, "x").profile);

  CHECK(runCli({"fmt", "-w", target.string()}).code == cli::kOk);
  CHECK(readFile(target.string()) == printed.out);
  CHECK(runCli({"validate", target.string()}).code == cli::kOk);
  CHECK(runCli({"fmt", "--check", target.string()}).code == cli::kOk);

  // Several files print only with --write or --check.
  CHECK(runCli({"fmt", target.string(), target.string()}).code == cli::kUsage);
  CHECK(runCli({"fmt", "--check", target.string(), target.string()}).code == cli::kOk);
  CHECK(runCli({"fmt", fixturePath("malformed.json")}).code == cli::kValidationFailed);
  CHECK(runCli({"fmt", (dir / "absent.json").string()}).code == cli::kUsage);
  fs::remove_all(dir);
}

TEST_CASE("graph") {
  const auto r = runCli({"graph", fixturePath("pair-dev1.json"), fixturePath("pair-dev2.json")});
  REQUIRE(r.code == cli::kOk);
  const auto doc = json::parse(r.out);
  CHECK(doc["nodes"].size() == 2);
  REQUIRE(doc["links"].size() == 2);
  for (const auto& link : doc["links"]) CHECK(link["stacks"].size() == 3);

  const auto dot = runCli({"graph", "--format", "dot", fixturePath("minimal.json")});
  CHECK(dot.code == cli::kOk);
  CHECK(dot.out.rfind("digraph", 0) == 0);

  CHECK(runCli({"graph", "--format", "svg", fixturePath("minimal.json")}).code == cli::kUsage);
  CHECK(runCli({"graph", fixturePath("malformed.json")}).code == cli::kValidationFailed);
  CHECK(runCli({"graph", fixturePath("minimal.json"), "/nonexistent/x.json"}).code == cli::kUsage);
}

TEST_CASE("graph output file and trees") {
  const auto dir = scratchDir("graph");
  const auto out = dir / "graph.json";
  const auto trees = dir / "trees";
  const auto r = runCli({"graph", "-o", out.string(), "--dump-trees", trees.string(),
                      fixturePath("pair-dev1.json"), fixturePath("pair-dev2.json")});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.empty());
  CHECK(json::parse(readFile(out.string()))["links"].size() == 2);
  std::size_t txt = 0, dot = 0;
  for (const auto& e : fs::directory_iterator(trees)) {
    txt += e.path().extension() == ".txt";
    dot += e.path().extension() == ".dot";
  }
  CHECK(txt == 2);
  CHECK(dot == 2);
  fs::remove_all(dir);
}

TEST_CASE("promises and require-complete") {
  const auto cam = fixturePath("my-controller.json");
  const auto pending = runCli({"graph", "--require-complete", cam});
  CHECK(pending.code == cli::kIncomplete);
  CHECK(pending.err.find("pending promise") != std::string::npos);
  CHECK(json::parse(pending.out)["promises"].size() == 1);

  const auto dir = scratchDir("map");
  const auto map = dir / "map.json";
  std::ofstream(map) << R"([{"classUri": "https://cam.example.com/cam.json", "hosts": ["ctrl-1"]}])";
  const auto done = runCli({"graph", "--require-complete", "--controller-map", map.string(), cam});
  CHECK(done.code == cli::kOk);
  const auto doc = json::parse(done.out);
  CHECK(doc["promises"][0]["pending"] == false);
  bool hasController = false;
  for (const auto& n : doc["nodes"]) hasController |= n["id"] == "ctrl-1";
  CHECK(hasController);
  fs::remove_all(dir);
}

TEST_CASE("visitor profiles") {
  const auto r = runCli({"graph", fixturePath("pair-dev1.json"), "--visitor",
                      fixturePath("pair-dev2.json")});
  REQUIRE(r.code == cli::kOk);
  const auto doc = json::parse(r.out);
  CHECK(doc["nodes"].size() == 2);
}

TEST_CASE("report") {
  CHECK(runCli({"report", "--json", fixturePath("pair-dev1.json")}).out.empty());
  const auto r = runCli({"report", "--json", fixturePath("redundant.json")});
  CHECK(r.code == cli::kOk);
  const auto line = json::parse(r.out);
  CHECK(line["ace"] == "ipp-narrow");
  CHECK(line["direction"] == "from-device");
  CHECK(runCli({"report", fixturePath("malformed.json")}).code == cli::kValidationFailed);
}

TEST_CASE("bench arguments") {
  CHECK(runCli({"bench", "--copies", "0", "--file", fixturePath("minimal.json")}).code == cli::kUsage);
  CHECK(runCli({"bench", "--copies", "2"}).code == cli::kUsage);
  const auto r = runCli({"bench", "-n", "3", "-f", fixturePath("bench-heavy.json")});
  REQUIRE(r.code == cli::kOk);
  const auto doc = json::parse(r.out);
  CHECK(doc["copies"] == 3);
  CHECK(doc["graph"]["nodes"].get<int>() >= 3);
  CHECK(doc["exportBytes"].get<std::size_t>() > 0);
}

TEST_CASE("help and version") {
  CHECK(runCli({"--help"}).code == cli::kOk);
  const auto v = runCli({"--version"});
  CHECK(v.code == cli::kOk);
  CHECK_FALSE((v.out + v.err).empty());
}
