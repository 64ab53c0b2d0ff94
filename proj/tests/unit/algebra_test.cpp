#include "doctest.h"
#include "mudscope/algebra.hpp"
#include "support/oracles.hpp"

using namespace mudscope;
using namespace mudscope::testing;

namespace {
LayerValue net(const char* t) { return LayerValue::parse(Layer::Network, t); }
LayerValue tr(const char* t) { return LayerValue::parse(Layer::Transport, t); }
LayerValue pt(const char* t) { return LayerValue::parse(Layer::SrcPort, t); }
}  // namespace

TEST_CASE("layerSubset") {
  CHECK(layerSubset(net("IPv6"), net("any")));
  CHECK_FALSE(layerSubset(tr("any"), tr("TCP")));
  CHECK(layerSubset(pt("5000"), pt("5000")));
  CHECK(layerSubset(pt("4500-4600"), pt("4000-6000")));
  CHECK_FALSE(layerSubset(pt("3000-4600"), pt("4000-6000")));
  CHECK(layerSubset(pt("80,443"), pt("1-1000")));
  CHECK_FALSE(layerSubset(pt("80,443"), pt("80,444")));
  CHECK(layerSubset(tr("TCP"), tr("TCP|UDP")));
}

TEST_CASE("layerIntersect") {
  CHECK(*layerIntersect(tr("UDP"), tr("any")) == tr("UDP"));
  CHECK_FALSE(layerIntersect(net("IPv4"), net("IPv6")).has_value());
  CHECK(*layerIntersect(pt("5000"), pt("4000-6000")) == pt("5000"));
  CHECK(*layerIntersect(pt("1-10,20-30"), pt("5-25")) == pt("5-10,20-25"));
  CHECK(*layerIntersect(tr("TCP|UDP"), tr("UDP|ICMP")) == tr("UDP"));
}

TEST_CASE("layers of different kinds do not mix") {
  CHECK_THROWS_AS(layerSubset(tr("TCP"), pt("80")), LayerMismatch);
  CHECK_THROWS_AS(layerIntersect(net("IPv4"), tr("TCP")), LayerMismatch);
  CHECK_NOTHROW(layerIntersect(LayerValue::any(), pt("80")));
}

TEST_CASE("mergeStacks reproduces the two-device rows") {
  const auto a = mergeStacks(S("IPv4", "UDP", "any", "any"),
                             S("any", "any", "5000", "400", Direction::ToDevice));
  REQUIRE(a);
  CHECK(a->sameLayers(S("IPv4", "UDP", "5000", "400")));
  CHECK(a->direction == Direction::FromDevice);

  const auto b = mergeStacks(S("any", "TCP", "5000", "any"),
                             S("IPv6", "any", "any", "8080", Direction::ToDevice));
  REQUIRE(b);
  CHECK(b->sameLayers(S("IPv6", "TCP", "5000", "8080")));

  CHECK_FALSE(mergeStacks(S("IPv4", "UDP", "any", "any"),
                          S("IPv6", "any", "any", "8080", Direction::ToDevice)));
}

TEST_CASE("subset guard mode rejects rows the intersection keeps") {
  // Source port any is not inside 5000, so the literal guard refuses.
  CHECK_FALSE(mergeStacks(S("IPv4", "UDP", "any", "any"),
                          S("any", "any", "5000", "400", Direction::ToDevice),
                          MergeMode::SubsetGuard));
  const auto ok = mergeStacks(S("IPv4", "UDP", "5000", "400"),
                              S("any", "any", "any", "any", Direction::ToDevice),
                              MergeMode::SubsetGuard);
  REQUIRE(ok);
  CHECK(ok->sameLayers(S("IPv4", "UDP", "5000", "400")));
}

TEST_CASE("mergeAcls") {
  SUBCASE("two-device example yields three merged stacks in index order") {
    CHECK(render(mergeAcls(pairDev1(), pairDev2())) ==
          std::vector<std::string>{"[IPv4, UDP, 5000, 400]", "[any, TCP, 5000, 400]",
                                   "[IPv6, TCP, 5000, 8080]"});
  }
  SUBCASE("empty side") {
    CHECK(mergeAcls({}, pairDev2()).empty());
    CHECK(mergeAcls(pairDev1(), {}).empty());
  }
  SUBCASE("self merge") {
    const auto s = S("IPv4", "TCP", "any", "any");
    CHECK(render(mergeAcls({s}, {s.withDirection(Direction::ToDevice)})) ==
          std::vector<std::string>{"[IPv4, TCP, any, any]"});
  }
  SUBCASE("duplicates are retained") {
    const auto s = S("any", "TCP", "any", "80");
    const auto out = mergeAcls({s, s}, {S("IPv4", "any", "any", "any", Direction::ToDevice)});
    CHECK(out.size() == 2);
  }
}

TEST_CASE("property: merge equals intersection of concretizations") {
  StackGen gen(20240601);
  for (int i = 0; i < 400; ++i) {
    const auto a = gen.stacks(4, Direction::FromDevice, true);
    const auto b = gen.stacks(4, Direction::ToDevice, true);
    std::vector<ProtocolStack> all = a;
    all.insert(all.end(), b.begin(), b.end());
    const auto u = Universe::covering(all);
    CHECK(concretizeAll(mergeAcls(a, b), u) ==
          intersectSets(concretizeAll(a, u), concretizeAll(b, u)));
  }
}

TEST_CASE("property: layer algebra agrees with concretization") {
  StackGen gen(99);
  for (int i = 0; i < 1000; ++i) {
    const auto a = gen.stack(Direction::FromDevice, true);
    const auto b = gen.stack(Direction::FromDevice, true);
    for (int l = 0; l < kLayerCount; ++l) {
      const auto layer = static_cast<Layer>(l);
      const auto& x = a.layer(layer);
      const auto& y = b.layer(layer);
      const auto meet = layerIntersect(x, y);
      CHECK(layerSubset(x, y) == (meet.has_value() && *meet == x));
      if (!isNamedLayer(layer)) {
        const auto mx = portMembership(x);
        const auto my = portMembership(y);
        bool subset = true;
        bool disjoint = true;
        for (std::size_t p = 0; p < mx.size(); ++p) {
          subset &= !mx[p] || my[p];
          disjoint &= !(mx[p] && my[p]);
        }
        CHECK(layerSubset(x, y) == subset);
        CHECK(meet.has_value() == !disjoint);
      }
    }
  }
}

TEST_CASE("property: merge is symmetric and idempotent") {
  StackGen gen(5);
  for (int i = 0; i < 500; ++i) {
    const auto a = gen.stack(Direction::FromDevice, true);
    const auto b = gen.stack(Direction::FromDevice, true);
    const auto ab = mergeStacks(a, b.withDirection(Direction::ToDevice));
    const auto ba = mergeStacks(b, a.withDirection(Direction::ToDevice));
    REQUIRE(ab.has_value() == ba.has_value());
    if (ab) CHECK(ab->sameLayers(*ba));
    const auto aa = mergeStacks(a, a.withDirection(Direction::ToDevice));
    REQUIRE(aa);
    CHECK(aa->sameLayers(a));
  }
}
