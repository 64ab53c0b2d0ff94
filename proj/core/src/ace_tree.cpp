#include "mudscope/ace_tree.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "mudscope/algebra.hpp"

namespace mudscope {

bool PortPair::subsetOf(const PortPair& other) const {
  return layerSubset(src, other.src) && layerSubset(dst, other.dst);
}

std::string PortPair::toString() const {
  return "[" + src.toString() + ", " + dst.toString() + "]";
}

std::string AceTreeNode::labelString() const {
  if (std::holds_alternative<Root>(label)) return "root";
  if (isLeaf()) return portLabel().toString();
  return layerLabel().toString();
}

std::size_t AceTreeNode::leafCount() const {
  if (isLeaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leafCount();
  return n;
}

// ---------------------------------------------------------------------------
// Construction

namespace {

AceTreeNode& childFor(AceTreeNode& node, AceTreeNode::Label label, bool wildcard) {
  for (auto& c : node.children) {
    if (c.label == label) return c;
  }
  AceTreeNode child;
  child.label = std::move(label);
  child.level = node.level + 1;
  child.isWildcard = wildcard;
  node.children.push_back(std::move(child));
  return node.children.back();
}

AceTreeNode& descendLayer(AceTreeNode& node, const LayerValue& value) {
  if (value.isAny() || value.protocolCount() > 1) {
    return childFor(node, LayerValue::any(), true);
  }
  return childFor(node, value, false);
}

}  // namespace

AceTreeNode buildAceTree(const std::vector<ProtocolStack>& stacks) {
  AceTreeNode root;
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    const auto& s = stacks[i];
    AceTreeNode& network = descendLayer(root, s.network);
    AceTreeNode& transport = descendLayer(network, s.transport);
    AceTreeNode& leaf = childFor(transport, PortPair{s.srcPort, s.dstPort}, false);
    leaf.origins.push_back(i);
  }
  return root;
}

// ---------------------------------------------------------------------------
// Traversal

namespace {

void collectStacks(const AceTreeNode& node, std::vector<const AceTreeNode*>& path,
                   Direction direction, std::vector<ProtocolStack>& out) {
  if (node.isLeaf()) {
    const auto& pp = node.portLabel();
    out.push_back({path[1]->layerLabel(), path[2]->layerLabel(), pp.src, pp.dst, direction});
    return;
  }
  for (const auto& c : node.children) {
    path.push_back(&c);
    collectStacks(c, path, direction, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<ProtocolStack> traverse(const AceTreeNode& root, Direction direction) {
  std::vector<ProtocolStack> out;
  std::vector<const AceTreeNode*> path{&root};
  for (const auto& c : root.children) {
    path.push_back(&c);
    collectStacks(c, path, direction, out);
    path.pop_back();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pruning

namespace {

struct LeafRef {
  // path[0] is the root, path[3] the leaf itself.
  std::vector<const AceTreeNode*> path;
  bool alive = true;
  int coveredBy = -1;
  bool bySibling = false;

  const AceTreeNode* leaf() const { return path.back(); }
  const AceTreeNode* ancestor(int n) const {
    return n < static_cast<int>(path.size()) ? path[path.size() - 1 - n] : nullptr;
  }
};

void collectLeaves(const AceTreeNode& node, std::vector<const AceTreeNode*>& path,
                   std::vector<LeafRef>& out) {
  if (node.isLeaf()) {
    out.push_back({path});
    return;
  }
  for (const auto& c : node.children) {
    path.push_back(&c);
    collectLeaves(c, path, out);
    path.pop_back();
  }
}

// Walks both leaves upward in lockstep. Prunes when the walk reaches a pair
// of sibling ancestors with A(L) strictly inside A(C). Below that point every
// ancestor of L must be contained in the matching ancestor of C, so the pruned
// leaf's traffic is covered by the cousin. Reaching a shared ancestor ends the
// walk without pruning.
bool coveredByCousin(const LeafRef& l, const LeafRef& c) {
  for (int n = 1;; ++n) {
    const AceTreeNode* al = l.ancestor(n);
    const AceTreeNode* ac = c.ancestor(n);
    if (al == nullptr || ac == nullptr || al == ac || al->level == 0) return false;
    const bool siblings = l.ancestor(n + 1) == c.ancestor(n + 1);
    if (siblings) return layerStrictSubset(al->layerLabel(), ac->layerLabel());
    if (!layerSubset(al->layerLabel(), ac->layerLabel())) return false;
  }
}

// Rebuilds the tree without dead leaves and without internal nodes that lost
// every leaf below them.
bool copyLive(const AceTreeNode& node, const std::vector<const AceTreeNode*>& dead,
              AceTreeNode& out) {
  out.label = node.label;
  out.level = node.level;
  out.isWildcard = node.isWildcard;
  out.origins = node.origins;
  if (node.isLeaf()) return std::find(dead.begin(), dead.end(), &node) == dead.end();
  for (const auto& c : node.children) {
    AceTreeNode copy;
    if (copyLive(c, dead, copy)) out.children.push_back(std::move(copy));
  }
  return node.level == 0 || !out.children.empty();
}

ProtocolStack stackOf(const LeafRef& ref) {
  const auto& pp = ref.leaf()->portLabel();
  return {ref.path[1]->layerLabel(), ref.path[2]->layerLabel(), pp.src, pp.dst,
          Direction::FromDevice};
}

// One pass over the leaves in left-to-right order. Returns false when nothing
// was pruned.
bool prunePass(const AceTreeNode& root, AceTreeNode& next, std::vector<PrunedLeaf>& log) {
  std::vector<LeafRef> leaves;
  std::vector<const AceTreeNode*> path{&root};
  collectLeaves(root, path, leaves);

  for (std::size_t i = 0; i < leaves.size(); ++i) {
    LeafRef& l = leaves[i];
    const PortPair& lp = l.leaf()->portLabel();
    const AceTreeNode* parent = l.ancestor(1);

    for (std::size_t j = 0; j < leaves.size() && l.alive; ++j) {
      const LeafRef& s = leaves[j];
      if (j == i || !s.alive || s.ancestor(1) != parent) continue;
      const PortPair& sp = s.leaf()->portLabel();
      if ((lp.subsetOf(sp) && lp != sp) || (lp == sp && j < i)) {
        l.alive = false;
        l.coveredBy = static_cast<int>(j);
        l.bySibling = true;
      }
    }
    for (std::size_t j = 0; j < leaves.size() && l.alive; ++j) {
      const LeafRef& c = leaves[j];
      if (j == i || !c.alive || c.ancestor(1) == parent) continue;
      if (lp.subsetOf(c.leaf()->portLabel()) && coveredByCousin(l, c)) {
        l.alive = false;
        l.coveredBy = static_cast<int>(j);
      }
    }
  }

  std::vector<const AceTreeNode*> dead;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (leaves[i].alive) continue;
    dead.push_back(leaves[i].leaf());
    // Follow the chain to a surviving cover.
    int cover = leaves[i].coveredBy;
    while (!leaves[cover].alive) cover = leaves[cover].coveredBy;
    log.push_back({stackOf(leaves[i]), leaves[i].leaf()->origins, stackOf(leaves[cover]),
                   leaves[cover].leaf()->origins, leaves[i].bySibling});
  }
  if (dead.empty()) return false;
  next = AceTreeNode{};
  copyLive(root, dead, next);
  return true;
}

}  // namespace

PruneResult pruneAceTreeDetailed(const AceTreeNode& root) {
  PruneResult result;
  result.tree = root;
  for (;;) {
    AceTreeNode next;
    ++result.passes;
    if (!prunePass(result.tree, next, result.pruned)) break;
    result.tree = std::move(next);
  }
  return result;
}

AceTreeNode pruneAceTree(const AceTreeNode& root) { return pruneAceTreeDetailed(root).tree; }

std::vector<ProtocolStack> pruneStacks(const std::vector<ProtocolStack>& stacks) {
  if (stacks.empty()) return {};
  return traverse(pruneAceTree(buildAceTree(stacks)), stacks.front().direction);
}

// ---------------------------------------------------------------------------
// Debug dumps

namespace {

void dumpText(const AceTreeNode& node, int depth, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << node.labelString();
  if (node.isWildcard) out << " (wildcard)";
  out << '\n';
  for (const auto& c : node.children) dumpText(c, depth + 1, out);
}

std::string dotEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

int dumpDot(const AceTreeNode& node, int& counter, std::ostringstream& out) {
  const int id = counter++;
  out << "  n" << id << " [label=\"" << dotEscape(node.labelString()) << "\"";
  if (node.isWildcard) out << ", style=dashed";
  if (node.isLeaf()) out << ", shape=box";
  out << "];\n";
  for (const auto& c : node.children) {
    const int child = dumpDot(c, counter, out);
    out << "  n" << id << " -> n" << child << ";\n";
  }
  return id;
}

}  // namespace

std::string dumpTreeText(const AceTreeNode& root) {
  std::ostringstream out;
  dumpText(root, 0, out);
  return out.str();
}

std::string dumpTreeDot(const AceTreeNode& root, const std::string& graphName) {
  std::ostringstream out;
  out << "digraph \"" << dotEscape(graphName) << "\" {\n";
  int counter = 0;
  dumpDot(root, counter, out);
  out << "}\n";
  return out.str();
}

}  // namespace mudscope
