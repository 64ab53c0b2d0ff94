#pragma once

#include <optional>
#include <vector>

#include "mudscope/model.hpp"

namespace mudscope {

// How two stacks are combined layer by layer.
enum class MergeMode {
  // Keep the intersection whenever it is non-empty (reproduces the merged
  // rows of the two-device example).
  Intersection,
  // Literal guard: the source layer must be contained in the destination
  // layer. Kept for comparison runs (--strict-alg1).
  SubsetGuard,
};

// Both operands must come from the same layer; throws LayerMismatch when one
// is named and the other a port set.
bool layerSubset(const LayerValue& a, const LayerValue& b);
bool layerStrictSubset(const LayerValue& a, const LayerValue& b);
std::optional<LayerValue> layerIntersect(const LayerValue& a, const LayerValue& b);

bool stackSubset(const ProtocolStack& a, const ProtocolStack& b);

// Layer-wise combination of an outbound stack of the sender and an inbound
// stack of the receiver. Returns nullopt unless every layer is non-empty.
// The result carries the source's direction.
std::optional<ProtocolStack> mergeStacks(const ProtocolStack& src, const ProtocolStack& dst,
                                         MergeMode mode = MergeMode::Intersection);

struct MergedPair {
  std::size_t srcIndex;
  std::size_t dstIndex;
  ProtocolStack stack;
};

// Cross product in (src, dst) lexicographic order, duplicates kept.
std::vector<ProtocolStack> mergeAcls(const std::vector<ProtocolStack>& src,
                                     const std::vector<ProtocolStack>& dst,
                                     MergeMode mode = MergeMode::Intersection);
std::vector<MergedPair> mergeAclsIndexed(const std::vector<ProtocolStack>& src,
                                         const std::vector<ProtocolStack>& dst,
                                         MergeMode mode = MergeMode::Intersection);

}  // namespace mudscope
