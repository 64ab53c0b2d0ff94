#pragma once

// Test-only helpers: reference data from the worked examples, random
// generators, and brute-force oracles that work purely on concretized
// tuple sets so they stay independent of the layer algebra.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mudscope/model.hpp"

namespace mudscope::testing {

inline ProtocolStack S(const char* n, const char* t, const char* sp, const char* dp,
                       Direction d = Direction::FromDevice) {
  return makeStack(n, t, sp, dp, d);
}

// Two-device merge example.
inline std::vector<ProtocolStack> pairDev1() {
  return {S("IPv4", "UDP", "any", "any"), S("any", "TCP", "5000", "any")};
}
inline std::vector<ProtocolStack> pairDev2() {
  return {S("any", "any", "5000", "400", Direction::ToDevice),
          S("IPv6", "any", "any", "8080", Direction::ToDevice)};
}
inline std::vector<ProtocolStack> pairMerged() {
  return {S("IPv4", "UDP", "5000", "400"), S("IPv6", "TCP", "5000", "8080"),
          S("any", "TCP", "5000", "400")};
}

// Pruning example: eight original rows and the four that survive.
inline std::vector<ProtocolStack> pruneExampleRows() {
  return {S("IPv4", "TCP", "80", "43"),   S("IPv4", "TCP", "any", "any"),
          S("IPv4", "UDP", "800", "520"), S("IPv4", "any", "800", "520"),
          S("IPv6", "UDP", "90", "120"),  S("any", "TCP", "400", "480"),
          S("any", "UDP", "90", "120"),   S("any", "any", "400", "480")};
}
inline std::vector<ProtocolStack> pruneExampleSurvivors() {
  return {S("IPv4", "TCP", "any", "any"), S("IPv4", "any", "800", "520"),
          S("any", "UDP", "90", "120"), S("any", "any", "400", "480")};
}

inline std::set<std::string> renderSet(const std::vector<ProtocolStack>& stacks) {
  std::set<std::string> out;
  for (const auto& s : stacks) out.insert(s.toString());
  return out;
}

inline std::vector<std::string> render(const std::vector<ProtocolStack>& stacks) {
  std::vector<std::string> out;
  for (const auto& s : stacks) out.push_back(s.toString());
  return out;
}

// ---------------------------------------------------------------------------
// Random generation over a small vocabulary so overlaps are frequent.

class StackGen {
 public:
  explicit StackGen(std::uint32_t seed) : rng_(seed) {}

  LayerValue network() {
    switch (pick(3)) {
      case 0: return LayerValue::any();
      case 1: return LayerValue::named(Layer::Network, {Protocol::IPv4});
      default: return LayerValue::named(Layer::Network, {Protocol::IPv6});
    }
  }

  LayerValue transport(bool allowMulti) {
    switch (pick(allowMulti ? 6 : 4)) {
      case 0: return LayerValue::any();
      case 1: return LayerValue::named(Layer::Transport, {Protocol::TCP});
      case 2: return LayerValue::named(Layer::Transport, {Protocol::UDP});
      case 3: return LayerValue::named(Layer::Transport, {Protocol::ICMP});
      case 4: return LayerValue::named(Layer::Transport, {Protocol::TCP, Protocol::UDP});
      default: return LayerValue::named(Layer::Transport, {Protocol::UDP, Protocol::ICMP});
    }
  }

  LayerValue port() {
    static const std::uint16_t kPorts[] = {80, 400, 443, 5000, 8080};
    switch (pick(6)) {
      case 0:
      case 1: return LayerValue::any();
      case 2: return LayerValue::portRange(400, 5000);
      case 3: return LayerValue::ports({{80, 80}, {5000, 8080}});
      default: return LayerValue::port(kPorts[pick(5)]);
    }
  }

  ProtocolStack stack(Direction d = Direction::FromDevice, bool allowMulti = false) {
    return ProtocolStack{network(), transport(allowMulti), port(), port(), d};
  }

  std::vector<ProtocolStack> stacks(std::size_t maxCount, Direction d = Direction::FromDevice,
                                    bool allowMulti = false) {
    std::vector<ProtocolStack> out(pick(static_cast<int>(maxCount) + 1));
    for (auto& s : out) s = stack(d, allowMulti);
    return out;
  }

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

 private:
  std::mt19937 rng_;
};

// ---------------------------------------------------------------------------
// Brute-force oracles.

inline std::set<ConcreteTuple> intersectSets(const std::set<ConcreteTuple>& a,
                                             const std::set<ConcreteTuple>& b) {
  std::set<ConcreteTuple> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

inline bool isSubsetSet(const std::set<ConcreteTuple>& a, const std::set<ConcreteTuple>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Port membership over the whole 16-bit domain.
inline std::vector<bool> portMembership(const LayerValue& v) {
  std::vector<bool> out(kMaxPort + 1);
  for (unsigned p = 0; p <= kMaxPort; ++p) out[p] = v.contains(static_cast<std::uint16_t>(p));
  return out;
}

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& name) {
  return readFile(std::string(MUDSCOPE_FIXTURE_DIR) + "/" + name);
}

inline std::string fixturePath(const std::string& name) {
  return std::string(MUDSCOPE_FIXTURE_DIR) + "/" + name;
}

// Every file in the fixture corpus, sorted by name.
inline std::vector<std::string> fixtureNames() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(MUDSCOPE_FIXTURE_DIR)) {
    if (e.is_regular_file()) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The eight-profile set used for topology determinism checks. Together the
// files use all seven endpoint abstractions.
inline const std::vector<std::string>& topologySet() {
  static const std::vector<std::string> names = {
      "pair-dev1.json", "pair-dev2.json", "same-mfg-a.json",  "same-mfg-b.json",
      "manufacturer.json", "model.json",      "my-controller.json", "controller.json"};
  return names;
}

}  // namespace mudscope::testing
