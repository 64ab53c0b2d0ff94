#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mudscope/ace_tree.hpp"
#include "mudscope/algebra.hpp"
#include "mudscope/model.hpp"

namespace mudscope {

enum class NodeKind { Device, ExternalHost, ControllerClass, LocalNetwork, Gateway };

std::string_view to_string(NodeKind k);
std::optional<NodeKind> nodeKindFromString(std::string_view s);

struct GraphNode {
  std::string id;
  NodeKind kind = NodeKind::Device;
  std::string label;
  std::string mudUrl;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

// Which ACEs justify a link. For Device-Device links both sides are cited;
// external and controller links cite only the device side.
struct Provenance {
  std::string abstraction;
  std::string targetAbstraction;
  std::vector<std::string> sourceAces;
  std::vector<std::string> targetAces;
  bool oneSided = false;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct FlowLink {
  std::string source;
  std::string target;
  std::vector<ProtocolStack> stacks;
  std::vector<Provenance> provenance;

  friend bool operator==(const FlowLink&, const FlowLink&) = default;
};

struct RedundantAce {
  std::string deviceId;
  std::string aceName;
  Direction direction = Direction::FromDevice;
  std::string reason;

  friend bool operator==(const RedundantAce&, const RedundantAce&) = default;
};

// A host named when fulfilling a promise: either an existing node id or a new
// node of the given kind.
struct HostSpec {
  std::string id;
  NodeKind kind = NodeKind::ControllerClass;

  friend bool operator==(const HostSpec&, const HostSpec&) = default;
};

class TopologyError : public std::runtime_error {
 public:
  enum class Code {
    DuplicateProfile,
    UnknownDevice,
    UnknownNode,
    UnknownPromise,
    AlreadyFulfilled,
    EmptyHostList,
  };

  TopologyError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view to_string(TopologyError::Code c);

struct TopologyOptions {
  MergeMode mergeMode = MergeMode::Intersection;
  // Emit Device-Device links when only one side's policy names the other.
  bool oneSidedLinks = false;
};

// Whether an ACE owned by `owner` selects `candidate` as a peer device.
// `bothLocal` tells whether the two devices share the modelled LAN.
bool matchRule(const AceEndpoint& endpoint, const DeviceProfile& owner,
               const DeviceProfile& candidate, bool bothLocal = true);

// Cumulative time spent inside mutations, split by phase.
struct EngineStats {
  double resolveSeconds = 0;
  double mergePruneSeconds = 0;
  std::size_t pairsResolved = 0;
  std::size_t stacksMerged = 0;
};

// The connectivity graph over a set of loaded device profiles. Mutations are
// incremental, and the result is always identical to rebuilding from the
// same profiles and fulfillments in any order. Copies are independent
// snapshots.
class ConnectivityGraph {
 public:
  explicit ConnectivityGraph(TopologyOptions options = {}) : options_(options) {}

  const TopologyOptions& options() const { return options_; }

  // Throws TopologyError(DuplicateProfile) when the id is already loaded.
  void addProfile(const DeviceProfile& profile, bool local = true);
  // Throws TopologyError(UnknownDevice).
  void removeProfile(const std::string& deviceId);
  // Hosts that name an existing node reuse it; others become new nodes.
  // Throws UnknownPromise, AlreadyFulfilled, EmptyHostList.
  void fulfillPromise(const std::string& promiseId, const std::vector<HostSpec>& hosts);

  // Throws UnknownNode.
  std::vector<ProtocolStack> queryFlow(const std::string& srcNodeId,
                                       const std::string& dstNodeId) const;
  std::vector<RedundantAce> redundancyReport() const;

  // Canonically ordered by id / (source, target).
  std::vector<GraphNode> nodes() const;
  std::vector<FlowLink> links() const;
  // Visits links in links() order without materializing the whole list.
  void forEachLink(const std::function<void(const FlowLink&)>& visit) const;
  std::vector<ControllerPromise> promises() const;

  std::size_t nodeCount() const { return devices_.size() + auxNodes_.size(); }
  std::size_t linkCount() const { return parts_.size(); }

  bool hasNode(const std::string& id) const;
  bool hasDevice(const std::string& id) const { return devices_.count(id) != 0; }
  const DeviceProfile* profile(const std::string& deviceId) const;
  std::vector<std::string> deviceIds() const;
  std::size_t pendingPromiseCount() const;
  // Hosts a promise was fulfilled with, including their kinds; empty when pending.
  std::vector<HostSpec> fulfillment(const std::string& promiseId) const;

  // Bumped by every successful mutation.
  std::uint64_t revision() const { return revision_; }
  const EngineStats& stats() const { return stats_; }

  // ACE trees (before pruning) behind every link, keyed "source->target".
  std::vector<std::pair<std::string, AceTreeNode>> linkTrees() const;

 private:
  struct Device {
    DeviceProfile profile;
    bool local = true;
  };
  struct LinkPart {
    // Merged stacks before pruning, kept only when pruning changed them.
    std::vector<ProtocolStack> merged;
    std::vector<ProtocolStack> stacks;
    std::vector<Provenance> provenance;

    const std::vector<ProtocolStack>& unpruned() const {
      return merged.empty() ? stacks : merged;
    }
    void prune() {
      stacks = pruneStacks(merged);
      if (stacks == merged) merged.clear();
    }
  };
  using LinkKey = std::pair<std::string, std::string>;

  void computePair(const Device& src, const Device& dst);
  void addExternalLinks(const Device& device);
  void addPromises(const Device& device);
  void materializePromise(const ControllerPromise& promise);
  void dropPartsWhere(const std::string& partPrefix);
  void collectGarbageNodes();
  FlowLink combine(const LinkKey& key, const std::map<std::string, LinkPart>& parts) const;

  TopologyOptions options_;
  std::map<std::string, Device> devices_;
  std::map<std::string, GraphNode> auxNodes_;
  std::map<LinkKey, std::map<std::string, LinkPart>> parts_;
  std::map<std::string, ControllerPromise> promises_;
  // Fulfilled promises keep the full host specs for re-materialization.
  std::map<std::string, std::vector<HostSpec>> fulfillments_;
  std::uint64_t revision_ = 0;
  EngineStats stats_;
};

}  // namespace mudscope
