#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mudscope/ace_tree.hpp"
#include "mudscope/algebra.hpp"
#include "mudscope/parser.hpp"
#include "mudscope/topology.hpp"

namespace {

using namespace mudscope;

std::vector<ProtocolStack> randomStacks(std::size_t count, std::uint32_t seed, Direction d) {
  static const char* kNet[] = {"any", "IPv4", "IPv6"};
  static const char* kTransport[] = {"any", "TCP", "UDP"};
  static const char* kPort[] = {"any", "80", "443", "5000", "400-5000", "8080"};
  std::mt19937 rng(seed);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::vector<ProtocolStack> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(makeStack(kNet[pick(3)], kTransport[pick(3)], kPort[pick(6)], kPort[pick(6)], d));
  }
  return out;
}

void BM_MergeAcls(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto src = randomStacks(n, 1, Direction::FromDevice);
  const auto dst = randomStacks(n, 2, Direction::ToDevice);
  for (auto _ : state) benchmark::DoNotOptimize(mergeAcls(src, dst));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MergeAcls)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_PruneStacks(benchmark::State& state) {
  const auto stacks = randomStacks(static_cast<std::size_t>(state.range(0)), 3, Direction::FromDevice);
  for (auto _ : state) benchmark::DoNotOptimize(pruneStacks(stacks));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PruneStacks)->RangeMultiplier(4)->Range(8, 2048)->Complexity();

std::vector<DeviceProfile> heavyCopies(int copies) {
  std::ifstream in(MUDSCOPE_BENCH_FIXTURE);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::string url = "https://bench.example.com/sensor.json";
  std::vector<DeviceProfile> out;
  for (int i = 0; i < copies; ++i) {
    std::string copy = text;
    copy.replace(copy.find(url), url.size(),
                 "https://bench.example.com/sensor-" + std::to_string(i) + ".json");
    out.push_back(*parseMudFile(copy, "bench").profile);
  }
  return out;
}

void BM_AddProfiles(benchmark::State& state) {
  const auto profiles = heavyCopies(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    ConnectivityGraph graph;
    for (const auto& p : profiles) graph.addProfile(p);
    benchmark::DoNotOptimize(graph.linkCount());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AddProfiles)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond)->Complexity();

void BM_ParseHeavy(benchmark::State& state) {
  std::ifstream in(MUDSCOPE_BENCH_FIXTURE);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  for (auto _ : state) benchmark::DoNotOptimize(parseMudFile(text, "bench"));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseHeavy);

}  // namespace

BENCHMARK_MAIN();
