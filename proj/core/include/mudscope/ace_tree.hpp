#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mudscope/model.hpp"

namespace mudscope {

struct PortPair {
  LayerValue src;
  LayerValue dst;

  bool subsetOf(const PortPair& other) const;
  std::string toString() const;

  friend bool operator==(const PortPair&, const PortPair&) = default;
};

// Per-destination tree: level 1 holds network protocols, level 2 transport
// protocols, level 3 leaves hold (source port, destination port) pairs.
// A layer with more than one protocol descends through the wildcard child,
// labelled "any".
struct AceTreeNode {
  struct Root {
    friend bool operator==(const Root&, const Root&) = default;
  };
  using Label = std::variant<Root, LayerValue, PortPair>;

  static constexpr int kLeafLevel = 3;

  Label label = Root{};
  int level = 0;
  bool isWildcard = false;
  std::vector<AceTreeNode> children;
  // Leaves only: indexes of the input stacks that landed on this path.
  std::vector<std::size_t> origins;

  bool isLeaf() const { return level == kLeafLevel; }
  const LayerValue& layerLabel() const { return std::get<LayerValue>(label); }
  const PortPair& portLabel() const { return std::get<PortPair>(label); }
  std::string labelString() const;
  std::size_t leafCount() const;

  friend bool operator==(const AceTreeNode&, const AceTreeNode&) = default;
};

AceTreeNode buildAceTree(const std::vector<ProtocolStack>& stacks);

struct PrunedLeaf {
  ProtocolStack stack;
  std::vector<std::size_t> origins;
  // The surviving leaf whose traffic covers the pruned one.
  ProtocolStack coveredBy;
  std::vector<std::size_t> coverOrigins;
  bool bySibling = false;
};

struct PruneResult {
  AceTreeNode tree;
  std::vector<PrunedLeaf> pruned;
  int passes = 0;
};

AceTreeNode pruneAceTree(const AceTreeNode& root);
PruneResult pruneAceTreeDetailed(const AceTreeNode& root);

// Depth-first, left-to-right, one stack per leaf.
std::vector<ProtocolStack> traverse(const AceTreeNode& root,
                                    Direction direction = Direction::FromDevice);

// traverse(prune(build(stacks))) with the direction of the first stack.
std::vector<ProtocolStack> pruneStacks(const std::vector<ProtocolStack>& stacks);

std::string dumpTreeText(const AceTreeNode& root);
std::string dumpTreeDot(const AceTreeNode& root, const std::string& graphName);

}  // namespace mudscope
