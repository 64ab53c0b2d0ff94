#include "mudscope_cli/bench.hpp"

#include <sys/resource.h>

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <streambuf>
#include <stdexcept>

#include "json.hpp"
#include "mudscope/graph_io.hpp"
#include "mudscope/parser.hpp"
#include "mudscope/topology.hpp"

namespace mudscope::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string readAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Discards output and counts bytes, so export timing excludes disk speed.
struct CountingBuffer : std::streambuf {
  std::size_t bytes = 0;
  std::streamsize xsputn(const char*, std::streamsize n) override {
    bytes += static_cast<std::size_t>(n);
    return n;
  }
  int_type overflow(int_type c) override {
    if (!traits_type::eq_int_type(c, traits_type::eof())) ++bytes;
    return traits_type::not_eof(c);
  }
};

}  // namespace

double peakRssMb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<double>(usage.ru_maxrss) / 1024.0;  // ru_maxrss is KiB on Linux
}

std::string BenchReport::toJson() const {
  json doc = {
      {"copies", copies},
      {"phases",
       {{"parse", parseSeconds},
        {"resolve", resolveSeconds},
        {"mergePrune", mergePruneSeconds},
        {"export", exportSeconds}}},
      {"totalSeconds", totalSeconds},
      {"peakRssMb", peakRssMb},
      {"graph", {{"nodes", nodes}, {"links", links}, {"promises", promises}}},
      {"exportBytes", exportBytes},
  };
  return doc.dump(2) + "\n";
}

BenchReport runBench(const BenchOptions& options) {
  if (options.copies < 1) throw std::invalid_argument("copies must be at least 1");
  const auto start = Clock::now();
  const std::string text = readAll(options.file);

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(options.file + ": " + e.what());
  }
  auto& mud = doc["ietf-mud:mud"];
  if (!mud.is_object() || !mud["mud-url"].is_string()) {
    throw std::runtime_error(options.file + ": no mud-url");
  }
  const std::string url = mud["mud-url"].get<std::string>();
  const auto dot = url.rfind('.');
  const std::string stem = dot == std::string::npos || dot < url.rfind('/') ? url : url.substr(0, dot);
  const std::string ext = stem.size() == url.size() ? "" : url.substr(dot);

  // Copies are rendered up front so parse timing covers parsing only.
  std::vector<std::string> documents;
  documents.reserve(static_cast<std::size_t>(options.copies));
  for (int i = 0; i < options.copies; ++i) {
    mud["mud-url"] = stem + "-" + std::to_string(i) + ext;
    documents.push_back(doc.dump());
  }

  BenchReport report;
  report.copies = options.copies;

  auto t = Clock::now();
  std::vector<DeviceProfile> profiles;
  profiles.reserve(documents.size());
  for (const auto& d : documents) {
    auto parsed = parseMudFile(d, options.file);
    if (!parsed.profile) {
      throw std::runtime_error(options.file + " does not validate:\n" + parsed.report.toText());
    }
    profiles.push_back(std::move(*parsed.profile));
  }
  documents.clear();
  documents.shrink_to_fit();
  report.parseSeconds = since(t);

  ConnectivityGraph graph;
  for (const auto& p : profiles) graph.addProfile(p);
  report.resolveSeconds = graph.stats().resolveSeconds;
  report.mergePruneSeconds = graph.stats().mergePruneSeconds;

  t = Clock::now();
  CountingBuffer sink;
  std::ostream counter(&sink);
  writeGraphJson(graph, counter);
  counter.flush();
  report.exportSeconds = since(t);
  report.exportBytes = sink.bytes;
  report.nodes = graph.nodeCount();
  report.links = graph.linkCount();
  report.promises = graph.promises().size();

  report.totalSeconds = since(start);
  report.peakRssMb = peakRssMb();
  return report;
}

}  // namespace mudscope::cli
