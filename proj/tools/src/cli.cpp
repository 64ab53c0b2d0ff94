#include "mudscope_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mudscope/graph_io.hpp"
#include "mudscope/parser.hpp"
#include "mudscope/topology.hpp"
#include "mudscope_cli/bench.hpp"
#include "mudscope_cli/service.hpp"

namespace mudscope::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct LoadedFile {
  std::string path;
  std::string text;
  ParseResult result;
  bool missing = false;
};

struct LoadSet {
  std::vector<LoadedFile> files;
  bool anyMissing = false;
  bool anyErrors = false;
};

std::optional<std::string> readFile(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadSet loadAll(const std::vector<std::string>& paths) {
  LoadSet set;
  for (const auto& path : paths) {
    LoadedFile f;
    f.path = path;
    if (auto text = readFile(path)) {
      f.text = std::move(*text);
      f.result = parseMudFile(f.text, path);
    } else {
      f.missing = true;
      f.result.report.fileRef = path;
      f.result.report.items.push_back({Severity::Error, std::string(codes::kFileNotFound), "",
                                       "no such file or not readable"});
      set.anyMissing = true;
    }
    if (f.result.report.hasErrors()) set.anyErrors = true;
    set.files.push_back(std::move(f));
  }
  return set;
}

// Prints the reports of files with errors; returns the exit code to use, or
// kOk when everything loaded.
int failLoad(const LoadSet& set, std::ostream& err) {
  if (!set.anyErrors) return kOk;
  for (const auto& f : set.files) {
    if (f.result.report.hasErrors()) err << f.result.report.toText();
  }
  return set.anyMissing ? kUsage : kValidationFailed;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmdValidate(const std::vector<std::string>& paths, bool asJson, std::ostream& out) {
  const auto set = loadAll(paths);
  for (const auto& f : set.files) {
    out << (asJson ? f.result.report.toJsonLine() : f.result.report.toText());
  }
  if (set.anyMissing) return kUsage;
  return set.anyErrors ? kValidationFailed : kOk;
}

int cmdFmt(const std::vector<std::string>& paths, bool write, bool check, std::ostream& out,
           std::ostream& err) {
  if (!write && !check && paths.size() > 1) {
    err << "error: formatting several files needs --write or --check\n";
    return kUsage;
  }
  int code = kOk;
  for (const auto& path : paths) {
    auto text = readFile(path);
    if (!text) {
      err << path << ": no such file or not readable\n";
      code = kUsage;
      continue;
    }
    const auto formatted = formatCorrect(*text, path);
    if (!formatted.text) {
      err << formatted.report.toText();
      if (code == kOk) code = kValidationFailed;
      continue;
    }
    if (!formatted.report.items.empty()) err << formatted.report.toText();
    const bool changed = *formatted.text != *text;
    if (check) {
      if (changed) {
        out << path << ": would reformat\n";
        if (code == kOk) code = kValidationFailed;
      }
    } else if (write) {
      if (changed) {
        std::ofstream(path, std::ios::binary | std::ios::trunc) << *formatted.text;
      }
    } else {
      out << *formatted.text;
    }
  }
  return code;
}

struct GraphArgs {
  std::vector<std::string> paths;
  std::vector<std::string> visitors;
  std::string format = "json";
  std::string outPath;
  std::string controllerMap;
  std::string dumpTrees;
  bool strictAlg1 = false;
  bool oneSided = false;
  bool requireComplete = false;
};

void dumpTrees(const ConnectivityGraph& graph, const fs::path& dir) {
  fs::create_directories(dir);
  int index = 0;
  for (const auto& [name, tree] : graph.linkTrees()) {
    const auto arrow = name.find("->");
    const std::string stem = std::to_string(index++) + "_" + sanitize(name.substr(0, arrow)) +
                             "__" + sanitize(name.substr(arrow + 2));
    const auto pruned = pruneAceTree(tree);
    std::ofstream(dir / (stem + ".txt"))
        << "# " << name << "\n# built\n"
        << dumpTreeText(tree) << "# pruned\n"
        << dumpTreeText(pruned);
    std::ofstream(dir / (stem + ".dot")) << dumpTreeDot(pruned, name);
  }
}

int cmdGraph(const GraphArgs& args, std::ostream& out, std::ostream& err) {
  auto all = args.paths;
  all.insert(all.end(), args.visitors.begin(), args.visitors.end());
  const auto set = loadAll(all);
  if (int code = failLoad(set, err); code != kOk) return code;

  TopologyOptions options;
  options.mergeMode = args.strictAlg1 ? MergeMode::SubsetGuard : MergeMode::Intersection;
  options.oneSidedLinks = args.oneSided;
  ConnectivityGraph graph(options);
  for (std::size_t i = 0; i < set.files.size(); ++i) {
    try {
      graph.addProfile(*set.files[i].result.profile, i < args.paths.size());
    } catch (const TopologyError& e) {
      err << set.files[i].path << ": " << e.what() << '\n';
      return kValidationFailed;
    }
  }

  if (!args.controllerMap.empty()) {
    auto text = readFile(args.controllerMap);
    if (!text) {
      err << args.controllerMap << ": no such file or not readable\n";
      return kUsage;
    }
    try {
      const auto result = applyPromiseLedger(graph, readPromiseLedger(*text));
      for (const auto& u : result.unmatched) {
        err << "warning: controller map entry not applied: " << u << '\n';
      }
    } catch (const std::invalid_argument& e) {
      err << args.controllerMap << ": " << e.what() << '\n';
      return kValidationFailed;
    }
  }

  if (!args.dumpTrees.empty()) dumpTrees(graph, args.dumpTrees);

  std::ofstream file;
  if (!args.outPath.empty()) {
    file.open(args.outPath, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << args.outPath << ": cannot write\n";
      return kUsage;
    }
  }
  std::ostream& sink = args.outPath.empty() ? out : file;
  if (args.format == "dot") {
    sink << exportGraphDot(graph);
  } else {
    writeGraphJson(graph, sink);
  }
  sink.flush();

  if (args.requireComplete && graph.pendingPromiseCount() > 0) {
    for (const auto& p : graph.promises()) {
      if (p.pending()) {
        err << "pending promise " << p.promiseId << " (" << to_string(p.kind) << " "
            << p.classUri << ")\n";
      }
    }
    return kIncomplete;
  }
  return kOk;
}

int cmdReport(const std::vector<std::string>& paths, bool asJson, std::ostream& out,
              std::ostream& err) {
  const auto set = loadAll(paths);
  if (int code = failLoad(set, err); code != kOk) return code;
  ConnectivityGraph graph;
  std::map<std::string, std::string> fileOf;
  for (const auto& f : set.files) {
    try {
      graph.addProfile(*f.result.profile);
    } catch (const TopologyError& e) {
      err << f.path << ": " << e.what() << '\n';
      return kValidationFailed;
    }
    fileOf[f.result.profile->id] = f.path;
  }
  for (const auto& r : graph.redundancyReport()) {
    if (asJson) {
      out << json{{"file", fileOf[r.deviceId]},
                  {"deviceId", r.deviceId},
                  {"ace", r.aceName},
                  {"direction", to_string(r.direction)},
                  {"reason", r.reason}}
                 .dump()
          << '\n';
    } else {
      out << fileOf[r.deviceId] << ": " << to_string(r.direction) << " ace '" << r.aceName
          << "' is redundant, " << r.reason << '\n';
    }
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MUD file analyzer: validation, formatting and device connectivity graphs",
               "mudscope"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mudscope 0.1.0");

  std::vector<std::string> paths;
  bool asJson = false;

  auto* validate = app.add_subcommand("validate", "Check MUD files and report problems");
  validate->add_option("files", paths, "MUD files")->required();
  validate->add_flag("--json", asJson, "One JSON report per line");

  bool write = false, check = false;
  auto* fmt = app.add_subcommand("fmt", "Apply safe fixes and canonical layout");
  fmt->add_option("files", paths, "MUD files")->required();
  auto* writeFlag = fmt->add_flag("--write,-w", write, "Rewrite files in place");
  fmt->add_flag("--check", check, "Exit 1 if any file is not canonical")->excludes(writeFlag);

  GraphArgs g;
  auto* graph = app.add_subcommand("graph", "Build the connectivity graph");
  graph->add_option("files", g.paths, "MUD files of local devices")->required();
  graph->add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json", "dot"}));
  graph->add_option("--out,-o", g.outPath, "Write the graph to a file");
  graph->add_option("--controller-map", g.controllerMap,
                    "JSON mapping of promises or controller classes to hosts");
  graph->add_flag("--strict-alg1", g.strictAlg1,
                  "Merge only when every source layer is a subset of the target layer");
  graph->add_flag("--one-sided-links", g.oneSided,
                  "Keep device links that only one side's policy justifies");
  graph->add_option("--dump-trees", g.dumpTrees, "Write ACE trees per link into a directory");
  graph->add_flag("--require-complete", g.requireComplete,
                  "Exit 3 while promises remain unfulfilled");
  graph->add_option("--visitor", g.visitors, "MUD file of a device outside the local network");

  auto* report = app.add_subcommand("report", "List redundant ACEs within each file");
  report->add_option("files", paths, "MUD files")->required();
  report->add_flag("--json", asJson, "One JSON object per line");

  ServiceOptions serve;
  std::string stateDir, staticDir;
  bool strict = false, oneSided = false;
  auto* srv = app.add_subcommand("serve", "Run the HTTP API");
  srv->add_option("--host", serve.host, "Listen address")->capture_default_str();
  srv->add_option("--port,-p", serve.port, "Listen port")
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();
  srv->add_option("--state-dir", stateDir, "State directory (default: $MUDSCOPE_STATE_DIR)");
  srv->add_option("--static-dir", staticDir, "Directory served at /");
  srv->add_flag("--strict-alg1", strict, "Subset-gated merging");
  srv->add_flag("--one-sided-links", oneSided, "Keep one-sided device links");
  srv->add_flag("--log-requests", serve.logRequests, "Log one line per request");

  BenchOptions bench;
  auto* benchCmd = app.add_subcommand("bench", "Time loading N copies of one profile");
  benchCmd->add_option("--copies,-n", bench.copies, "Number of copies")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  benchCmd->add_option("--file,-f", bench.file, "Profile to copy")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  if (*validate) return cmdValidate(paths, asJson, out);
  if (*fmt) return cmdFmt(paths, write, check, out, err);
  if (*graph) return cmdGraph(g, out, err);
  if (*report) return cmdReport(paths, asJson, out, err);
  if (*srv) {
    if (stateDir.empty()) {
      const char* env = std::getenv("MUDSCOPE_STATE_DIR");
      stateDir = env && *env ? env : "mudscope-state";
    }
    serve.stateDir = stateDir;
    serve.staticDir = staticDir;
    serve.topology.mergeMode = strict ? MergeMode::SubsetGuard : MergeMode::Intersection;
    serve.topology.oneSidedLinks = oneSided;
    return runService(serve, err);
  }
  if (*benchCmd) {
    try {
      out << runBench(bench).toJson();
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kValidationFailed;
    }
    return kOk;
  }
  return kUsage;
}

}  // namespace mudscope::cli
