#include "mudscope/algebra.hpp"

#include <algorithm>

namespace mudscope {

namespace {

using Kind = LayerValue::Kind;

Layer namedLayerOf(std::uint8_t mask) {
  return (mask & layerUniverseMask(Layer::Network)) != 0 ? Layer::Network : Layer::Transport;
}

void checkSameLayer(const LayerValue& a, const LayerValue& b) {
  if (a.isAny() || b.isAny()) return;
  if (a.kind() != b.kind()) throw LayerMismatch("protocol set compared with port set");
  if (a.kind() == Kind::Named && namedLayerOf(a.mask()) != namedLayerOf(b.mask())) {
    throw LayerMismatch("network protocol compared with transport protocol");
  }
}

// Both inputs sorted and coalesced.
std::vector<PortRange> intersectRanges(const std::vector<PortRange>& a,
                                       const std::vector<PortRange>& b) {
  std::vector<PortRange> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const auto lo = std::max(a[i].lo, b[j].lo);
    const auto hi = std::min(a[i].hi, b[j].hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

}  // namespace

bool layerSubset(const LayerValue& a, const LayerValue& b) {
  checkSameLayer(a, b);
  if (b.isAny()) return true;
  if (a.isAny()) return false;
  if (a.kind() == Kind::Named) return (a.mask() & ~b.mask()) == 0;
  return intersectRanges(a.ranges(), b.ranges()) == a.ranges();
}

bool layerStrictSubset(const LayerValue& a, const LayerValue& b) {
  return layerSubset(a, b) && a != b;
}

std::optional<LayerValue> layerIntersect(const LayerValue& a, const LayerValue& b) {
  checkSameLayer(a, b);
  if (a.isAny()) return b;
  if (b.isAny()) return a;
  if (a.kind() == Kind::Named) {
    const std::uint8_t common = a.mask() & b.mask();
    if (common == 0) return std::nullopt;
    return LayerValue::namedMask(namedLayerOf(common), common);
  }
  auto common = intersectRanges(a.ranges(), b.ranges());
  if (common.empty()) return std::nullopt;
  return LayerValue::ports(std::move(common));
}

bool stackSubset(const ProtocolStack& a, const ProtocolStack& b) {
  return layerSubset(a.network, b.network) && layerSubset(a.transport, b.transport) &&
         layerSubset(a.srcPort, b.srcPort) && layerSubset(a.dstPort, b.dstPort);
}

std::optional<ProtocolStack> mergeStacks(const ProtocolStack& src, const ProtocolStack& dst,
                                         MergeMode mode) {
  ProtocolStack out;
  out.direction = src.direction;
  for (int i = 0; i < kLayerCount; ++i) {
    const auto layer = static_cast<Layer>(i);
    const auto& s = src.layer(layer);
    const auto& d = dst.layer(layer);
    if (mode == MergeMode::SubsetGuard && !layerSubset(s, d)) return std::nullopt;
    auto common = layerIntersect(s, d);
    if (!common) return std::nullopt;
    out.layer(layer) = std::move(*common);
  }
  return out;
}

std::vector<MergedPair> mergeAclsIndexed(const std::vector<ProtocolStack>& src,
                                         const std::vector<ProtocolStack>& dst,
                                         MergeMode mode) {
  std::vector<MergedPair> out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < dst.size(); ++j) {
      if (auto merged = mergeStacks(src[i], dst[j], mode)) {
        out.push_back({i, j, std::move(*merged)});
      }
    }
  }
  return out;
}

std::vector<ProtocolStack> mergeAcls(const std::vector<ProtocolStack>& src,
                                     const std::vector<ProtocolStack>& dst, MergeMode mode) {
  std::vector<ProtocolStack> out;
  for (auto& pair : mergeAclsIndexed(src, dst, mode)) out.push_back(std::move(pair.stack));
  return out;
}

}  // namespace mudscope
