#include "doctest.h"
#include "mudscope/ace_tree.hpp"
#include "mudscope/algebra.hpp"
#include "support/oracles.hpp"

using namespace mudscope;
using namespace mudscope::testing;

namespace {

std::vector<std::string> childLabels(const AceTreeNode& node) {
  std::vector<std::string> out;
  for (const auto& c : node.children) out.push_back(c.labelString());
  return out;
}

const AceTreeNode& childNamed(const AceTreeNode& node, const std::string& label) {
  for (const auto& c : node.children) {
    if (c.labelString() == label) return c;
  }
  FAIL("no child " << label);
  return node;
}

const PrunedLeaf* findPruned(const PruneResult& r, const ProtocolStack& s) {
  for (const auto& p : r.pruned) {
    if (p.stack.sameLayers(s)) return &p;
  }
  return nullptr;
}

void checkAntichain(const AceTreeNode& node) {
  if (node.level == 2) {
    for (const auto& a : node.children) {
      for (const auto& b : node.children) {
        if (&a == &b) continue;
        CHECK_FALSE((a.portLabel().subsetOf(b.portLabel()) && a.portLabel() != b.portLabel()));
      }
    }
    return;
  }
  for (const auto& c : node.children) checkAntichain(c);
}

}  // namespace

TEST_CASE("build: eight original rows give the reference tree shape") {
  const auto tree = buildAceTree(pruneExampleRows());
  CHECK(childLabels(tree) == std::vector<std::string>{"IPv4", "IPv6", "any"});
  CHECK(childLabels(childNamed(tree, "IPv4")) == std::vector<std::string>{"TCP", "UDP", "any"});
  CHECK(childLabels(childNamed(tree, "IPv6")) == std::vector<std::string>{"UDP"});
  CHECK(childLabels(childNamed(tree, "any")) == std::vector<std::string>{"TCP", "UDP", "any"});
  CHECK(tree.leafCount() == 8);
  CHECK(childNamed(tree, "any").isWildcard);
  CHECK(render(traverse(tree)) == render(pruneExampleRows()));
}

TEST_CASE("build: single stack is a single path") {
  const auto tree = buildAceTree({S("IPv4", "TCP", "80", "43")});
  REQUIRE(tree.children.size() == 1);
  const auto& n = tree.children[0];
  CHECK(n.labelString() == "IPv4");
  REQUIRE(n.children.size() == 1);
  CHECK(n.children[0].labelString() == "TCP");
  REQUIRE(n.children[0].children.size() == 1);
  CHECK(n.children[0].children[0].labelString() == "[80, 43]");
  CHECK(n.children[0].children[0].isLeaf());
}

TEST_CASE("build: a multi-protocol layer descends through the wildcard child") {
  const auto tree = buildAceTree({S("IPv4", "TCP|UDP", "80", "43")});
  const auto& transport = tree.children.at(0).children.at(0);
  CHECK(transport.isWildcard);
  CHECK(transport.labelString() == "any");
  CHECK(transport.children.at(0).isLeaf());
  // Wildcard widening over-approximates.
  CHECK(render(traverse(tree)) == std::vector<std::string>{"[IPv4, any, 80, 43]"});
}

TEST_CASE("build: existing children are reused") {
  const auto tree = buildAceTree({S("IPv4", "TCP", "80", "43"), S("IPv4", "TCP", "80", "43"),
                                  S("IPv4", "TCP", "81", "43")});
  CHECK(tree.children.size() == 1);
  CHECK(tree.leafCount() == 2);
  CHECK(tree.children[0].children[0].children[0].origins == std::vector<std::size_t>{0, 1});
}

TEST_CASE("prune: reference tree reduces to the four surviving rows") {
  const auto pruned = pruneAceTree(buildAceTree(pruneExampleRows()));
  CHECK(render(traverse(pruned)) == render(pruneExampleSurvivors()));
  CHECK(childLabels(pruned) == std::vector<std::string>{"IPv4", "any"});
}

TEST_CASE("prune: individual rules on the reference tree") {
  const auto result = pruneAceTreeDetailed(buildAceTree(pruneExampleRows()));
  REQUIRE(result.pruned.size() == 4);

  SUBCASE("sibling rule: [80,43] under [any,any]") {
    const auto* p = findPruned(result, S("IPv4", "TCP", "80", "43"));
    REQUIRE(p);
    CHECK(p->bySibling);
    CHECK(p->coveredBy.sameLayers(S("IPv4", "TCP", "any", "any")));
  }
  SUBCASE("cousin rule at the network level: IPv6/UDP [90,120]") {
    const auto* p = findPruned(result, S("IPv6", "UDP", "90", "120"));
    REQUIRE(p);
    CHECK_FALSE(p->bySibling);
    CHECK(p->coveredBy.sameLayers(S("any", "UDP", "90", "120")));
  }
  SUBCASE("cousin rule at the parent level: UDP [800,520]") {
    const auto* p = findPruned(result, S("IPv4", "UDP", "800", "520"));
    REQUIRE(p);
    CHECK_FALSE(p->bySibling);
    CHECK(p->coveredBy.sameLayers(S("IPv4", "any", "800", "520")));
  }
  SUBCASE("the surviving equal-port cousin is kept") {
    CHECK_FALSE(findPruned(result, S("any", "UDP", "90", "120")));
    CHECK_FALSE(findPruned(result, S("IPv4", "any", "800", "520")));
  }
}

TEST_CASE("prune: single leaf is unchanged") {
  const auto tree = buildAceTree({S("IPv4", "TCP", "80", "43")});
  CHECK(pruneAceTree(tree) == tree);
}

TEST_CASE("prune: cousin walk requires containment at every level") {
  // The network ancestors are siblings with IPv6 inside any, but TCP is not
  // inside UDP, so the leaf must stay.
  const auto tree =
      buildAceTree({S("IPv6", "TCP", "90", "120"), S("any", "UDP", "90", "120")});
  CHECK(pruneAceTree(tree) == tree);
}

TEST_CASE("prune: sibling with a wider port pair") {
  const auto tree =
      buildAceTree({S("IPv4", "UDP", "90", "120"), S("IPv4", "UDP", "90", "any")});
  CHECK(render(traverse(pruneAceTree(tree))) ==
        std::vector<std::string>{"[IPv4, UDP, 90, any]"});
}

TEST_CASE("prune: incomparable sibling ancestors stop the walk") {
  const auto tree = buildAceTree({S("IPv4", "TCP", "1", "2"), S("IPv4", "UDP", "1", "2")});
  CHECK(pruneAceTree(tree) == tree);
}

TEST_CASE("prune: removed leaves take empty branches with them") {
  const auto tree = buildAceTree({S("IPv6", "UDP", "1", "2"), S("any", "any", "any", "any")});
  const auto pruned = pruneAceTree(tree);
  CHECK(childLabels(pruned) == std::vector<std::string>{"any"});
  CHECK(pruned.leafCount() == 1);
}

TEST_CASE("traverse: root only gives nothing") {
  CHECK(traverse(AceTreeNode{}).empty());
  CHECK(traverse(buildAceTree({})).empty());
}

TEST_CASE("property: build then traverse returns the input set") {
  StackGen gen(3);
  for (int i = 0; i < 300; ++i) {
    auto stacks = gen.stacks(8);
    // No multi-protocol layers by construction; drop duplicates.
    std::vector<ProtocolStack> unique;
    for (const auto& s : stacks) {
      if (std::none_of(unique.begin(), unique.end(),
                       [&](const ProtocolStack& u) { return u.sameLayers(s); })) {
        unique.push_back(s);
      }
    }
    CHECK(renderSet(traverse(buildAceTree(unique))) == renderSet(unique));
  }
}

TEST_CASE("property: pruning preserves semantics, is idempotent, leaves an antichain") {
  StackGen gen(17);
  std::size_t prunedTotal = 0;
  for (int i = 0; i < 300; ++i) {
    const auto tree = buildAceTree(gen.stacks(10, Direction::FromDevice, true));
    const auto before = traverse(tree);
    const auto result = pruneAceTreeDetailed(tree);
    const auto after = traverse(result.tree);
    prunedTotal += result.pruned.size();
    std::vector<ProtocolStack> all = before;
    const auto u = Universe::covering(all);
    CHECK(concretizeAll(before, u) == concretizeAll(after, u));
    CHECK(pruneAceTree(result.tree) == result.tree);
    checkAntichain(result.tree);
    // Every pruned stack is covered by a survivor.
    for (const auto& p : result.pruned) {
      CHECK(stackSubset(p.stack, p.coveredBy));
      CHECK(std::any_of(after.begin(), after.end(),
                        [&](const ProtocolStack& s) { return s.sameLayers(p.coveredBy); }));
    }
  }
  CHECK(prunedTotal > 100);
}

TEST_CASE("determinism: identical inputs give identical trees") {
  StackGen a(123), b(123);
  for (int i = 0; i < 50; ++i) {
    CHECK(buildAceTree(a.stacks(10)) == buildAceTree(b.stacks(10)));
  }
}

TEST_CASE("dumps") {
  const auto tree = buildAceTree({S("IPv4", "TCP|UDP", "80", "43")});
  const auto text = dumpTreeText(tree);
  CHECK(text == "root\n  IPv4\n    any (wildcard)\n      [80, 43]\n");
  const auto dot = dumpTreeDot(tree, "d->e");
  CHECK(dot.rfind("digraph \"d->e\" {", 0) == 0);
  CHECK(dot.find("n2 -> n3") != std::string::npos);
  CHECK(dot.find("style=dashed") != std::string::npos);
}
