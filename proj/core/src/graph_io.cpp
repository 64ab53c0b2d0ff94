#include "mudscope/graph_io.hpp"

#include <sstream>

#include "json.hpp"

namespace mudscope {

using nlohmann::json;

namespace {

json stackObject(const ProtocolStack& s) {
  return {{"network", s.network.toString()},
          {"transport", s.transport.toString()},
          {"srcPort", s.srcPort.toString()},
          {"dstPort", s.dstPort.toString()}};
}

json stackArray(const std::vector<ProtocolStack>& stacks) {
  json out = json::array();
  for (const auto& s : stacks) out.push_back(stackObject(s));
  return out;
}

json nodeObject(const GraphNode& n) {
  json out = {{"id", n.id}, {"kind", to_string(n.kind)}, {"label", n.label}};
  if (n.kind == NodeKind::Device) out["mudUrl"] = n.mudUrl;
  return out;
}

json linkObject(const FlowLink& l) {
  json prov = json::array();
  for (const auto& p : l.provenance) {
    json entry = {{"abstraction", p.abstraction},
                  {"sourceAces", p.sourceAces},
                  {"targetAces", p.targetAces}};
    if (!p.targetAbstraction.empty()) entry["targetAbstraction"] = p.targetAbstraction;
    if (p.oneSided) entry["oneSided"] = true;
    prov.push_back(entry);
  }
  return {{"source", l.source},
          {"target", l.target},
          {"stacks", stackArray(l.stacks)},
          {"provenance", prov}};
}

json promiseObject(const ControllerPromise& p) {
  return {{"promiseId", p.promiseId},
          {"deviceId", p.deviceId},
          {"kind", to_string(p.kind)},
          {"classUri", p.classUri},
          {"pending", p.pending()},
          {"hosts", p.assignedHosts},
          {"aces", p.aceNames},
          {"outbound", stackArray(p.outbound)},
          {"inbound", stackArray(p.inbound)}};
}

template <typename T, typename F>
void writeArray(std::ostream& out, const char* key, const std::vector<T>& items, F toJson,
                bool last) {
  out << '"' << key << "\":[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out << (i == 0 ? "\n" : ",\n") << toJson(items[i]).dump();
  }
  out << (items.empty() ? "]" : "\n]") << (last ? "\n" : ",\n");
}

std::string dotQuote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string_view dotShape(NodeKind k) {
  switch (k) {
    case NodeKind::Device: return "box";
    case NodeKind::ExternalHost: return "ellipse";
    case NodeKind::ControllerClass: return "diamond";
    case NodeKind::LocalNetwork: return "hexagon";
    case NodeKind::Gateway: return "octagon";
  }
  return "ellipse";
}

}  // namespace

std::string stackJson(const ProtocolStack& stack) { return stackObject(stack).dump(); }

std::string exportPromisesJson(const ConnectivityGraph& graph) {
  json out = json::array();
  for (const auto& p : graph.promises()) out.push_back(promiseObject(p));
  return out.dump();
}

void writeGraphJson(const ConnectivityGraph& graph, std::ostream& out) {
  out << "{\"version\":\"" << kGraphSchemaVersion << "\",\n";
  writeArray(out, "nodes", graph.nodes(), nodeObject, false);
  out << "\"links\":[";
  bool first = true;
  graph.forEachLink([&](const FlowLink& link) {
    out << (first ? "\n" : ",\n") << linkObject(link).dump();
    first = false;
  });
  out << (first ? "],\n" : "\n],\n");
  writeArray(out, "promises", graph.promises(), promiseObject, true);
  out << "}\n";
}

std::string exportGraphJson(const ConnectivityGraph& graph) {
  std::ostringstream out;
  writeGraphJson(graph, out);
  return out.str();
}

std::string exportGraphDot(const ConnectivityGraph& graph) {
  std::ostringstream out;
  out << "digraph mudscope {\n";
  for (const auto& n : graph.nodes()) {
    out << "  " << dotQuote(n.id) << " [label=" << dotQuote(n.label)
        << ", shape=" << dotShape(n.kind) << "];\n";
  }
  for (const auto& l : graph.links()) {
    out << "  " << dotQuote(l.source) << " -> " << dotQuote(l.target)
        << " [label=\"" << l.stacks.size() << "\"];\n";
  }
  for (const auto& p : graph.promises()) {
    if (!p.pending()) continue;
    const std::string ghost = "promise:" + p.promiseId;
    out << "  " << dotQuote(ghost) << " [label=" << dotQuote(p.classUri)
        << ", shape=diamond, style=dashed];\n";
    out << "  " << dotQuote(p.deviceId) << " -> " << dotQuote(ghost) << " [style=dashed];\n";
  }
  out << "}\n";
  return out.str();
}

std::string writePromiseLedger(const ConnectivityGraph& graph) {
  json entries = json::array();
  for (const auto& p : graph.promises()) {
    if (p.pending()) continue;
    json hosts = json::array();
    for (const auto& h : graph.fulfillment(p.promiseId)) {
      hosts.push_back({{"id", h.id}, {"kind", to_string(h.kind)}});
    }
    entries.push_back({{"promiseId", p.promiseId}, {"classUri", p.classUri}, {"hosts", hosts}});
  }
  json doc = {{"version", kGraphSchemaVersion}, {"promises", entries}};
  return doc.dump(2) + "\n";
}

std::vector<LedgerEntry> readPromiseLedger(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("promise ledger is not JSON: ") + e.what());
  }
  const json* list = nullptr;
  if (doc.is_array()) {
    list = &doc;
  } else if (doc.is_object() && doc.contains("promises") && doc["promises"].is_array()) {
    list = &doc["promises"];
  } else {
    throw std::invalid_argument("promise ledger must hold a 'promises' array");
  }
  std::vector<LedgerEntry> out;
  for (const auto& e : *list) {
    if (!e.is_object()) throw std::invalid_argument("ledger entry must be an object");
    LedgerEntry entry;
    if (auto it = e.find("promiseId"); it != e.end() && it->is_string()) {
      entry.promiseId = it->get<std::string>();
    }
    if (auto it = e.find("classUri"); it != e.end() && it->is_string()) {
      entry.classUri = it->get<std::string>();
    }
    if (entry.promiseId.empty() && entry.classUri.empty()) {
      throw std::invalid_argument("ledger entry needs promiseId or classUri");
    }
    auto hosts = e.find("hosts");
    if (hosts == e.end() || !hosts->is_array()) {
      throw std::invalid_argument("ledger entry needs a hosts array");
    }
    for (const auto& h : *hosts) {
      HostSpec spec;
      if (h.is_string()) {
        spec.id = h.get<std::string>();
      } else if (h.is_object() && h.contains("id") && h["id"].is_string()) {
        spec.id = h["id"].get<std::string>();
        if (h.contains("kind") && h["kind"].is_string()) {
          auto kind = nodeKindFromString(h["kind"].get<std::string>());
          if (!kind) throw std::invalid_argument("unknown host kind " + h["kind"].dump());
          spec.kind = *kind;
        }
      } else {
        throw std::invalid_argument("host must be a string or an {id, kind} object");
      }
      entry.hosts.push_back(std::move(spec));
    }
    out.push_back(std::move(entry));
  }
  return out;
}

LedgerApplyResult applyPromiseLedger(ConnectivityGraph& graph,
                                     const std::vector<LedgerEntry>& entries) {
  LedgerApplyResult result;
  for (const auto& entry : entries) {
    std::vector<std::string> targets;
    for (const auto& p : graph.promises()) {
      const bool match = entry.promiseId.empty() ? p.classUri == entry.classUri
                                                 : p.promiseId == entry.promiseId;
      if (match && p.pending()) targets.push_back(p.promiseId);
    }
    if (targets.empty()) {
      result.unmatched.push_back(entry.promiseId.empty() ? entry.classUri : entry.promiseId);
      continue;
    }
    for (const auto& id : targets) {
      try {
        graph.fulfillPromise(id, entry.hosts);
        ++result.fulfilled;
      } catch (const TopologyError& e) {
        result.unmatched.push_back(id + ": " + e.what());
      }
    }
  }
  return result;
}

}  // namespace mudscope
