#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mudscope/topology.hpp"

namespace mudscope::cli {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  // 0 binds an ephemeral port.
  int port = 8080;
  std::filesystem::path stateDir;
  // Served at "/" when set.
  std::filesystem::path staticDir;
  TopologyOptions topology;
  bool logRequests = false;
};

// The HTTP API over one ConnectivityGraph. State is written through to
// stateDir on every mutation: uploaded documents under profiles/, promise
// fulfillments in promises.json.
class Service {
 public:
  explicit Service(ServiceOptions options, std::ostream* log = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Reloads persisted profiles and fulfillments. Returns warnings for entries
  // that could not be restored.
  std::vector<std::string> restore();

  // False when the address is unavailable.
  bool bind();
  int port() const;
  // Blocks until stop().
  void serve();
  void stop();
  // Rewrites the promise ledger.
  void flush();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs the service until SIGINT or SIGTERM. Returns a process exit code.
int runService(const ServiceOptions& options, std::ostream& log);

}  // namespace mudscope::cli
