#include "mudscope/topology.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <set>

namespace mudscope {

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Device: return "device";
    case NodeKind::ExternalHost: return "external-host";
    case NodeKind::ControllerClass: return "controller-class";
    case NodeKind::LocalNetwork: return "local-network";
    case NodeKind::Gateway: return "gateway";
  }
  return "?";
}

std::optional<NodeKind> nodeKindFromString(std::string_view s) {
  for (NodeKind k : {NodeKind::Device, NodeKind::ExternalHost, NodeKind::ControllerClass,
                     NodeKind::LocalNetwork, NodeKind::Gateway}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(TopologyError::Code c) {
  using Code = TopologyError::Code;
  switch (c) {
    case Code::DuplicateProfile: return "DuplicateProfile";
    case Code::UnknownDevice: return "UnknownDevice";
    case Code::UnknownNode: return "UnknownNode";
    case Code::UnknownPromise: return "UnknownPromise";
    case Code::AlreadyFulfilled: return "AlreadyFulfilled";
    case Code::EmptyHostList: return "EmptyHostList";
  }
  return "?";
}

bool matchRule(const AceEndpoint& endpoint, const DeviceProfile& owner,
               const DeviceProfile& candidate, bool bothLocal) {
  switch (endpoint.kind) {
    case EndpointKind::LocalNetworks: return bothLocal;
    case EndpointKind::Manufacturer: return candidate.authority == endpoint.value;
    case EndpointKind::SameManufacturer:
      return !owner.authority.empty() && owner.authority == candidate.authority;
    case EndpointKind::Model: return candidate.mudUrl == endpoint.value;
    case EndpointKind::DomainName:
    case EndpointKind::Controller:
    case EndpointKind::MyController: return false;
  }
  return false;
}

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::string_view kPairPart = "pair";
constexpr std::string_view kExternalPart = "external";
constexpr std::string_view kPromisePart = "promise:";

std::string externalHostId(const std::string& dnsName) { return "dns:" + dnsName; }

void appendUnique(std::vector<std::string>& names, const std::string& name) {
  if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
}

}  // namespace

// ---------------------------------------------------------------------------
// Mutations

void ConnectivityGraph::addProfile(const DeviceProfile& profile, bool local) {
  if (devices_.count(profile.id) != 0) {
    throw TopologyError(TopologyError::Code::DuplicateProfile,
                        "profile '" + profile.id + "' already loaded");
  }
  const Device& added = devices_.emplace(profile.id, Device{profile, local}).first->second;
  for (const auto& [id, other] : devices_) {
    if (id == profile.id) continue;
    computePair(added, other);
    computePair(other, added);
  }
  addExternalLinks(added);
  addPromises(added);
  // Other devices' fulfilled promises that name this device as a host.
  for (const auto& [promiseId, hosts] : fulfillments_) {
    const auto& promise = promises_.at(promiseId);
    if (promise.deviceId == profile.id) continue;
    if (std::any_of(hosts.begin(), hosts.end(),
                    [&](const HostSpec& h) { return h.id == profile.id; })) {
      materializePromise(promise);
    }
  }
  ++revision_;
}

void ConnectivityGraph::computePair(const Device& src, const Device& dst) {
  const auto resolveStart = Clock::now();
  const bool bothLocal = src.local && dst.local;
  std::vector<const Ace*> out;
  std::vector<const Ace*> in;
  for (const auto& ace : src.profile.fromDevice) {
    if (matchRule(ace.endpoint, src.profile, dst.profile, bothLocal)) out.push_back(&ace);
  }
  for (const auto& ace : dst.profile.toDevice) {
    if (matchRule(ace.endpoint, dst.profile, src.profile, bothLocal)) in.push_back(&ace);
  }
  stats_.resolveSeconds += secondsSince(resolveStart);
  ++stats_.pairsResolved;
  if (out.empty() && in.empty()) return;

  const auto mergeStart = Clock::now();
  LinkPart part;
  if (!out.empty() && !in.empty()) {
    std::vector<ProtocolStack> outStacks, inStacks;
    for (const Ace* a : out) outStacks.push_back(a->stack);
    for (const Ace* a : in) inStacks.push_back(a->stack);
    auto merged = mergeAclsIndexed(outStacks, inStacks, options_.mergeMode);
    stats_.stacksMerged += merged.size();
    // Provenance grouped by the pair of abstractions that produced a merge.
    std::map<std::pair<EndpointKind, EndpointKind>, Provenance> byKind;
    for (auto& m : merged) {
      const Ace& s = *out[m.srcIndex];
      const Ace& d = *in[m.dstIndex];
      auto& prov = byKind[{s.endpoint.kind, d.endpoint.kind}];
      prov.abstraction = std::string(to_string(s.endpoint.kind));
      prov.targetAbstraction = std::string(to_string(d.endpoint.kind));
      appendUnique(prov.sourceAces, s.name);
      appendUnique(prov.targetAces, d.name);
      part.merged.push_back(std::move(m.stack));
    }
    for (auto& [kinds, prov] : byKind) part.provenance.push_back(std::move(prov));
  } else if (options_.oneSidedLinks) {
    const auto& side = out.empty() ? in : out;
    std::map<EndpointKind, Provenance> byKind;
    for (const Ace* a : side) {
      part.merged.push_back(a->stack.withDirection(Direction::FromDevice));
      auto& prov = byKind[a->endpoint.kind];
      prov.oneSided = true;
      if (out.empty()) {
        prov.targetAbstraction = std::string(to_string(a->endpoint.kind));
        appendUnique(prov.targetAces, a->name);
      } else {
        prov.abstraction = std::string(to_string(a->endpoint.kind));
        appendUnique(prov.sourceAces, a->name);
      }
    }
    for (auto& [kind, prov] : byKind) part.provenance.push_back(std::move(prov));
  }
  if (!part.merged.empty()) {
    part.prune();
    parts_[{src.profile.id, dst.profile.id}][std::string(kPairPart)] = std::move(part);
  }
  stats_.mergePruneSeconds += secondsSince(mergeStart);
}

void ConnectivityGraph::addExternalLinks(const Device& device) {
  const auto start = Clock::now();
  for (Direction dir : {Direction::FromDevice, Direction::ToDevice}) {
    const auto& aces = dir == Direction::FromDevice ? device.profile.fromDevice
                                                    : device.profile.toDevice;
    std::map<std::string, LinkPart> byHost;
    for (const auto& ace : aces) {
      if (ace.endpoint.kind != EndpointKind::DomainName) continue;
      auto& part = byHost[ace.endpoint.value];
      part.merged.push_back(ace.stack.withDirection(Direction::FromDevice));
      if (part.provenance.empty()) part.provenance.push_back({"domain-name", "", {}, {}, false});
      appendUnique(dir == Direction::FromDevice ? part.provenance.front().sourceAces
                                                : part.provenance.front().targetAces,
                   ace.name);
    }
    for (auto& [host, part] : byHost) {
      const std::string hostId = externalHostId(host);
      auxNodes_.try_emplace(hostId, GraphNode{hostId, NodeKind::ExternalHost, host, {}});
      part.prune();
      LinkKey key = dir == Direction::FromDevice ? LinkKey{device.profile.id, hostId}
                                                 : LinkKey{hostId, device.profile.id};
      parts_[key][std::string(kExternalPart)] = std::move(part);
    }
  }
  stats_.mergePruneSeconds += secondsSince(start);
}

void ConnectivityGraph::addPromises(const Device& device) {
  std::map<std::pair<ControllerKind, std::string>, ControllerPromise> found;
  for (Direction dir : {Direction::FromDevice, Direction::ToDevice}) {
    const auto& aces = dir == Direction::FromDevice ? device.profile.fromDevice
                                                    : device.profile.toDevice;
    for (const auto& ace : aces) {
      ControllerKind kind;
      std::string classUri;
      if (ace.endpoint.kind == EndpointKind::Controller) {
        kind = ControllerKind::Controller;
        classUri = ace.endpoint.value;
      } else if (ace.endpoint.kind == EndpointKind::MyController) {
        kind = ControllerKind::MyController;
        classUri = device.profile.mudUrl;
      } else {
        continue;
      }
      auto& p = found[{kind, classUri}];
      p.kind = kind;
      p.classUri = classUri;
      p.deviceId = device.profile.id;
      (dir == Direction::FromDevice ? p.outbound : p.inbound).push_back(ace.stack);
      appendUnique(p.aceNames, ace.name);
    }
  }
  for (auto& [key, p] : found) {
    p.promiseId = promiseIdFor(p.deviceId, p.kind, p.classUri);
    p.outbound = pruneStacks(p.outbound);
    p.inbound = pruneStacks(p.inbound);
    auto& stored = promises_[p.promiseId] = std::move(p);
    if (auto f = fulfillments_.find(stored.promiseId); f != fulfillments_.end()) {
      materializePromise(stored);
    }
  }
}

void ConnectivityGraph::materializePromise(const ControllerPromise& promise) {
  const auto& hosts = fulfillments_.at(promise.promiseId);
  const Device& device = devices_.at(promise.deviceId);
  const std::string partKey = std::string(kPromisePart) + promise.promiseId;
  Provenance prov{std::string(to_string(promise.kind)), "", {}, {}, false};
  for (const auto& host : hosts) {
    if (host.kind == NodeKind::Device && devices_.count(host.id) == 0) continue;
    if (devices_.count(host.id) == 0) {
      auxNodes_.try_emplace(host.id, GraphNode{host.id, host.kind, host.id, {}});
    }
    if (!promise.outbound.empty()) {
      LinkPart part;
      part.stacks = promise.outbound;
      part.provenance = {prov};
      for (const auto& ace : device.profile.fromDevice) {
        if (std::find(promise.aceNames.begin(), promise.aceNames.end(), ace.name) !=
            promise.aceNames.end()) {
          appendUnique(part.provenance.front().sourceAces, ace.name);
        }
      }
      parts_[{device.profile.id, host.id}][partKey] = std::move(part);
    }
    if (!promise.inbound.empty()) {
      LinkPart part;
      part.stacks = promise.inbound;
      part.provenance = {prov};
      for (const auto& ace : device.profile.toDevice) {
        if (std::find(promise.aceNames.begin(), promise.aceNames.end(), ace.name) !=
            promise.aceNames.end()) {
          appendUnique(part.provenance.front().targetAces, ace.name);
        }
      }
      parts_[{host.id, device.profile.id}][partKey] = std::move(part);
    }
  }
}

void ConnectivityGraph::fulfillPromise(const std::string& promiseId,
                                       const std::vector<HostSpec>& hosts) {
  auto it = promises_.find(promiseId);
  if (it == promises_.end()) {
    throw TopologyError(TopologyError::Code::UnknownPromise,
                        "no promise '" + promiseId + "'");
  }
  if (!it->second.pending()) {
    throw TopologyError(TopologyError::Code::AlreadyFulfilled,
                        "promise '" + promiseId + "' already fulfilled");
  }
  if (hosts.empty()) {
    throw TopologyError(TopologyError::Code::EmptyHostList, "host list is empty");
  }
  std::vector<HostSpec> unique;
  for (const auto& h : hosts) {
    if (h.id.empty()) {
      throw TopologyError(TopologyError::Code::EmptyHostList, "host with an empty id");
    }
    if (std::none_of(unique.begin(), unique.end(),
                     [&](const HostSpec& u) { return u.id == h.id; })) {
      unique.push_back(h);
    }
  }
  for (auto& h : unique) {
    if (auto aux = auxNodes_.find(h.id); aux != auxNodes_.end()) h.kind = aux->second.kind;
    if (devices_.count(h.id) != 0) h.kind = NodeKind::Device;
    it->second.assignedHosts.push_back(h.id);
  }
  fulfillments_[promiseId] = unique;
  materializePromise(it->second);
  ++revision_;
}

void ConnectivityGraph::dropPartsWhere(const std::string& partPrefix) {
  for (auto it = parts_.begin(); it != parts_.end();) {
    auto& inner = it->second;
    for (auto p = inner.begin(); p != inner.end();) {
      if (p->first.compare(0, partPrefix.size(), partPrefix) == 0) {
        p = inner.erase(p);
      } else {
        ++p;
      }
    }
    it = inner.empty() ? parts_.erase(it) : std::next(it);
  }
}

void ConnectivityGraph::collectGarbageNodes() {
  std::set<std::string> referenced;
  for (const auto& [key, inner] : parts_) {
    referenced.insert(key.first);
    referenced.insert(key.second);
  }
  for (auto it = auxNodes_.begin(); it != auxNodes_.end();) {
    it = referenced.count(it->first) == 0 ? auxNodes_.erase(it) : std::next(it);
  }
}

void ConnectivityGraph::removeProfile(const std::string& deviceId) {
  if (devices_.count(deviceId) == 0) {
    throw TopologyError(TopologyError::Code::UnknownDevice, "no device '" + deviceId + "'");
  }
  for (auto it = parts_.begin(); it != parts_.end();) {
    const bool touches = it->first.first == deviceId || it->first.second == deviceId;
    it = touches ? parts_.erase(it) : std::next(it);
  }
  for (auto it = promises_.begin(); it != promises_.end();) {
    if (it->second.deviceId == deviceId) {
      dropPartsWhere(std::string(kPromisePart) + it->first);
      fulfillments_.erase(it->first);
      it = promises_.erase(it);
    } else {
      ++it;
    }
  }
  devices_.erase(deviceId);
  collectGarbageNodes();
  ++revision_;
}

// ---------------------------------------------------------------------------
// Queries

FlowLink ConnectivityGraph::combine(const LinkKey& key,
                                    const std::map<std::string, LinkPart>& parts) const {
  FlowLink link{key.first, key.second, {}, {}};
  if (parts.size() == 1) {
    link.stacks = parts.begin()->second.stacks;
    link.provenance = parts.begin()->second.provenance;
    return link;
  }
  std::vector<ProtocolStack> all;
  for (const auto& [name, part] : parts) {
    all.insert(all.end(), part.unpruned().begin(), part.unpruned().end());
    link.provenance.insert(link.provenance.end(), part.provenance.begin(),
                           part.provenance.end());
  }
  link.stacks = pruneStacks(all);
  return link;
}

void ConnectivityGraph::forEachLink(const std::function<void(const FlowLink&)>& visit) const {
  for (const auto& [key, parts] : parts_) visit(combine(key, parts));
}

std::vector<FlowLink> ConnectivityGraph::links() const {
  std::vector<FlowLink> out;
  out.reserve(parts_.size());
  for (const auto& [key, parts] : parts_) out.push_back(combine(key, parts));
  return out;
}

std::vector<std::pair<std::string, AceTreeNode>> ConnectivityGraph::linkTrees() const {
  std::vector<std::pair<std::string, AceTreeNode>> out;
  for (const auto& [key, parts] : parts_) {
    std::vector<ProtocolStack> all;
    for (const auto& [name, part] : parts) {
      all.insert(all.end(), part.unpruned().begin(), part.unpruned().end());
    }
    out.emplace_back(key.first + "->" + key.second, buildAceTree(all));
  }
  return out;
}

std::vector<GraphNode> ConnectivityGraph::nodes() const {
  std::vector<GraphNode> out;
  for (const auto& [id, device] : devices_) {
    const auto& p = device.profile;
    std::string label = p.modelName.empty() ? p.systeminfo : p.modelName;
    if (label.empty()) label = p.mudUrl;
    out.push_back({id, NodeKind::Device, label, p.mudUrl});
  }
  for (const auto& [id, node] : auxNodes_) out.push_back(node);
  std::sort(out.begin(), out.end(),
            [](const GraphNode& a, const GraphNode& b) { return a.id < b.id; });
  return out;
}

std::vector<ControllerPromise> ConnectivityGraph::promises() const {
  std::vector<ControllerPromise> out;
  for (const auto& [id, p] : promises_) out.push_back(p);
  return out;
}

bool ConnectivityGraph::hasNode(const std::string& id) const {
  return devices_.count(id) != 0 || auxNodes_.count(id) != 0;
}

const DeviceProfile* ConnectivityGraph::profile(const std::string& deviceId) const {
  auto it = devices_.find(deviceId);
  return it == devices_.end() ? nullptr : &it->second.profile;
}

std::vector<std::string> ConnectivityGraph::deviceIds() const {
  std::vector<std::string> out;
  for (const auto& [id, d] : devices_) out.push_back(id);
  return out;
}

std::size_t ConnectivityGraph::pendingPromiseCount() const {
  return static_cast<std::size_t>(std::count_if(
      promises_.begin(), promises_.end(), [](const auto& p) { return p.second.pending(); }));
}

std::vector<HostSpec> ConnectivityGraph::fulfillment(const std::string& promiseId) const {
  auto it = fulfillments_.find(promiseId);
  return it == fulfillments_.end() ? std::vector<HostSpec>{} : it->second;
}

std::vector<ProtocolStack> ConnectivityGraph::queryFlow(const std::string& srcNodeId,
                                                        const std::string& dstNodeId) const {
  for (const auto* id : {&srcNodeId, &dstNodeId}) {
    if (!hasNode(*id)) {
      throw TopologyError(TopologyError::Code::UnknownNode, "no node '" + *id + "'");
    }
  }
  auto it = parts_.find({srcNodeId, dstNodeId});
  if (it == parts_.end()) return {};
  return combine(it->first, it->second).stacks;
}

std::vector<RedundantAce> ConnectivityGraph::redundancyReport() const {
  std::vector<RedundantAce> out;
  for (const auto& [id, device] : devices_) {
    for (Direction dir : {Direction::FromDevice, Direction::ToDevice}) {
      const auto& aces = dir == Direction::FromDevice ? device.profile.fromDevice
                                                      : device.profile.toDevice;
      // One tree per destination, in first-appearance order.
      std::vector<AceEndpoint> endpoints;
      for (const auto& ace : aces) {
        if (std::find(endpoints.begin(), endpoints.end(), ace.endpoint) == endpoints.end()) {
          endpoints.push_back(ace.endpoint);
        }
      }
      for (const auto& endpoint : endpoints) {
        std::vector<const Ace*> group;
        std::vector<ProtocolStack> stacks;
        for (const auto& ace : aces) {
          if (ace.endpoint == endpoint) {
            group.push_back(&ace);
            stacks.push_back(ace.stack);
          }
        }
        const AceTreeNode tree = buildAceTree(stacks);
        const PruneResult pruned = pruneAceTreeDetailed(tree);

        std::map<std::size_t, std::string> reasons;
        auto describe = [&](std::size_t coverIndex, const ProtocolStack& cover) {
          return "covered by '" + group[coverIndex]->name + "' " + cover.toString();
        };
        // Exact duplicates share a leaf; the first occurrence stands.
        std::function<void(const AceTreeNode&)> visit = [&](const AceTreeNode& node) {
          if (node.isLeaf()) {
            for (std::size_t k = 1; k < node.origins.size(); ++k) {
              reasons.emplace(node.origins[k],
                              describe(node.origins[0], group[node.origins[0]]->stack));
            }
            return;
          }
          for (const auto& c : node.children) visit(c);
        };
        visit(tree);
        for (const auto& leaf : pruned.pruned) {
          for (std::size_t origin : leaf.origins) {
            reasons[origin] = describe(leaf.coverOrigins.front(), leaf.coveredBy);
          }
        }
        for (const auto& [index, reason] : reasons) {
          out.push_back({id, group[index]->name, dir, reason});
        }
      }
    }
  }
  return out;
}

}  // namespace mudscope
