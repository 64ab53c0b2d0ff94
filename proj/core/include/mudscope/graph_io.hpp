#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mudscope/topology.hpp"

namespace mudscope {

inline constexpr std::string_view kGraphSchemaVersion = "1";

// Canonical graph document: {version, nodes[], links[], promises[]}, nodes by
// id, links by (source, target), one element per line. Byte-identical for
// equal graphs.
std::string exportGraphJson(const ConnectivityGraph& graph);
// Same document, streamed link by link.
void writeGraphJson(const ConnectivityGraph& graph, std::ostream& out);

// One digraph: devices as boxes, external hosts as ellipses, controller
// classes as diamonds; edge label is the stack count.
std::string exportGraphDot(const ConnectivityGraph& graph);

// The promises array of the graph document, as a standalone JSON array.
std::string exportPromisesJson(const ConnectivityGraph& graph);

// Stack object with the "any" literal and "n" / "n-m" ports.
std::string stackJson(const ProtocolStack& stack);

struct LedgerEntry {
  std::string promiseId;
  std::string classUri;
  std::vector<HostSpec> hosts;
};

// Fulfilled promises as {version, promises: [{promiseId, classUri, hosts}]}.
std::string writePromiseLedger(const ConnectivityGraph& graph);
// Throws std::invalid_argument on malformed input. Hosts may be given as
// strings or as {id, kind} objects; an entry without promiseId applies to
// every pending promise of its classUri.
std::vector<LedgerEntry> readPromiseLedger(std::string_view text);

struct LedgerApplyResult {
  std::size_t fulfilled = 0;
  std::vector<std::string> unmatched;
};

// Applies entries to pending promises; already fulfilled or unknown entries
// are reported as unmatched rather than thrown.
LedgerApplyResult applyPromiseLedger(ConnectivityGraph& graph,
                                     const std::vector<LedgerEntry>& entries);

}  // namespace mudscope
