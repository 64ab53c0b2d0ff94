#include "mudscope_cli/service.hpp"

#include <pthread.h>
#include <signal.h>
#include <sys/socket.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "mudscope/graph_io.hpp"
#include "mudscope/parser.hpp"
#include "mudscope_cli/cli.hpp"

namespace mudscope::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kJson = "application/json";

void sendError(httplib::Response& res, int status, std::string_view code,
               const std::string& message, const std::string& path = {}) {
  json body = {{"code", code}, {"message", message}};
  if (!path.empty()) body["path"] = path;
  res.status = status;
  res.set_content(body.dump(), kJson);
}

int statusFor(TopologyError::Code code) {
  switch (code) {
    case TopologyError::Code::DuplicateProfile: return 409;
    case TopologyError::Code::UnknownDevice:
    case TopologyError::Code::UnknownNode:
    case TopologyError::Code::UnknownPromise: return 404;
    case TopologyError::Code::AlreadyFulfilled: return 409;
    case TopologyError::Code::EmptyHostList: return 400;
  }
  return 500;
}

std::string readAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so a crash never leaves a truncated file behind.
void writeAtomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << text;
  }
  fs::rename(tmp, path);
}

std::string stripEtag(std::string tag) {
  if (tag.rfind("W/", 0) == 0) tag = tag.substr(2);
  if (tag.size() >= 2 && tag.front() == '"' && tag.back() == '"') {
    tag = tag.substr(1, tag.size() - 2);
  }
  return tag;
}

// Bind without SO_REUSEPORT so a second instance cannot share the port.
void exclusiveSocketOptions(socket_t sock) {
  int yes = 1;
  setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  std::ostream* log;
  httplib::Server server;
  int boundPort = -1;

  std::shared_mutex mutex;
  ConnectivityGraph graph;
  std::uint64_t exportRevision = ~std::uint64_t{0};
  std::string exportCache;
  std::mutex logMutex;

  Impl(ServiceOptions o, std::ostream* l)
      : options(std::move(o)), log(l), graph(options.topology) {}

  fs::path profileDir() const { return options.stateDir / "profiles"; }
  fs::path ledgerPath() const { return options.stateDir / "promises.json"; }

  void note(const std::string& line) {
    if (!log) return;
    std::lock_guard lock(logMutex);
    *log << line << '\n';
    log->flush();
  }

  // Caller holds the writer lock.
  void persistLedger() {
    if (options.stateDir.empty()) return;
    writeAtomically(ledgerPath(), writePromiseLedger(graph));
  }

  // Caller holds the writer lock.
  const std::string& currentExport() {
    if (exportRevision != graph.revision()) {
      exportCache = exportGraphJson(graph);
      exportRevision = graph.revision();
    }
    return exportCache;
  }

  void routes();
  void postMudFile(const httplib::Request& req, httplib::Response& res);
  void deleteMudFile(const httplib::Request& req, httplib::Response& res);
  void getGraph(const httplib::Request& req, httplib::Response& res);
  void putPromise(const httplib::Request& req, httplib::Response& res);
  void getFlows(const httplib::Request& req, httplib::Response& res);
  void getReport(httplib::Response& res);
};

void Service::Impl::routes() {
  server.set_socket_options(exclusiveSocketOptions);
  server.Post("/api/mudfiles", [this](const auto& req, auto& res) { postMudFile(req, res); });
  server.Get("/api/mudfiles", [this](const auto&, auto& res) {
    std::shared_lock lock(mutex);
    json list = json::array();
    for (const auto& id : graph.deviceIds()) {
      list.push_back({{"id", id}, {"mudUrl", graph.profile(id)->mudUrl}});
    }
    res.set_content(json{{"mudfiles", list}, {"revision", graph.revision()}}.dump(), kJson);
  });
  server.Delete(R"(/api/mudfiles/([^/]+))",
                [this](const auto& req, auto& res) { deleteMudFile(req, res); });
  server.Get("/api/graph", [this](const auto& req, auto& res) { getGraph(req, res); });
  server.Get("/api/promises", [this](const auto&, auto& res) {
    std::shared_lock lock(mutex);
    res.set_content("{\"promises\":" + exportPromisesJson(graph) +
                        ",\"revision\":" + std::to_string(graph.revision()) + "}",
                    kJson);
  });
  server.Put(R"(/api/promises/([^/]+))",
             [this](const auto& req, auto& res) { putPromise(req, res); });
  server.Get("/api/flows", [this](const auto& req, auto& res) { getFlows(req, res); });
  server.Get("/api/report", [this](const auto&, auto& res) { getReport(res); });

  if (!options.staticDir.empty()) server.set_mount_point("/", options.staticDir.string());

  server.set_exception_handler([](const auto&, auto& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    sendError(res, 500, "InternalError", what);
  });
  server.set_error_handler([](const auto& req, auto& res) {
    if (res.body.empty()) {
      sendError(res, res.status, res.status == 404 ? "NotFound" : "HttpError",
                req.method + " " + req.path);
    }
  });
  if (options.logRequests) {
    server.set_logger([this](const auto& req, const auto& res) {
      note(req.method + " " + req.path + " " + std::to_string(res.status));
    });
  }
}

void Service::Impl::postMudFile(const httplib::Request& req, httplib::Response& res) {
  auto parsed = parseMudFile(req.body, "upload");
  json report = json::parse(parsed.report.toJsonLine());
  if (!parsed.profile) {
    const ValidationItem* first = nullptr;
    for (const auto& item : parsed.report.items) {
      if (item.severity == Severity::Error) {
        first = &item;
        break;
      }
    }
    json body = {{"code", first ? first->code : "ValidationFailed"},
                 {"message", first ? first->message : "document did not validate"},
                 {"report", report}};
    if (first && !first->path.empty()) body["path"] = first->path;
    res.status = first && first->code == codes::kMalformedJson ? 400 : 422;
    res.set_content(body.dump(), kJson);
    return;
  }
  std::unique_lock lock(mutex);
  const std::string id = parsed.profile->id;
  try {
    graph.addProfile(*parsed.profile);
  } catch (const TopologyError& e) {
    sendError(res, statusFor(e.code()), to_string(e.code()), e.what());
    return;
  }
  if (!options.stateDir.empty()) {
    writeAtomically(profileDir() / (id + ".json"), req.body);
    persistLedger();
  }
  res.status = 201;
  res.set_content(json{{"id", id}, {"report", report}, {"revision", graph.revision()}}.dump(),
                  kJson);
}

void Service::Impl::deleteMudFile(const httplib::Request& req, httplib::Response& res) {
  const std::string id = req.matches[1];
  std::unique_lock lock(mutex);
  try {
    graph.removeProfile(id);
  } catch (const TopologyError& e) {
    sendError(res, statusFor(e.code()), to_string(e.code()), e.what());
    return;
  }
  if (!options.stateDir.empty()) {
    std::error_code ec;
    fs::remove(profileDir() / (id + ".json"), ec);
    persistLedger();
  }
  res.set_content(json{{"id", id}, {"revision", graph.revision()}}.dump(), kJson);
}

void Service::Impl::getGraph(const httplib::Request& req, httplib::Response& res) {
  std::unique_lock lock(mutex);
  const std::string revision = std::to_string(graph.revision());
  res.set_header("ETag", "\"" + revision + "\"");
  res.set_header("X-Graph-Revision", revision);
  if (req.has_header("If-None-Match")) {
    std::istringstream tags(req.get_header_value("If-None-Match"));
    for (std::string tag; std::getline(tags, tag, ',');) {
      const auto begin = tag.find_first_not_of(' ');
      if (begin == std::string::npos) continue;
      if (stripEtag(tag.substr(begin, tag.find_last_not_of(' ') - begin + 1)) == revision) {
        res.status = 304;
        return;
      }
    }
  }
  res.set_content(currentExport(), kJson);
}

void Service::Impl::putPromise(const httplib::Request& req, httplib::Response& res) {
  const std::string id = req.matches[1];
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error& e) {
    sendError(res, 400, codes::kMalformedJson, e.what());
    return;
  }
  if (!body.is_object() || !body.contains("hosts") || !body["hosts"].is_array()) {
    sendError(res, 400, codes::kMissingField, "body must be {\"hosts\": [...]}", "/hosts");
    return;
  }
  std::vector<HostSpec> hosts;
  try {
    // Reuse the ledger reader for host parsing.
    auto entries = readPromiseLedger(json::array({{{"promiseId", id}, {"hosts", body["hosts"]}}}).dump());
    hosts = std::move(entries.front().hosts);
  } catch (const std::invalid_argument& e) {
    sendError(res, 400, codes::kInvalidValue, e.what(), "/hosts");
    return;
  }
  std::unique_lock lock(mutex);
  try {
    graph.fulfillPromise(id, hosts);
  } catch (const TopologyError& e) {
    sendError(res, statusFor(e.code()), to_string(e.code()), e.what());
    return;
  }
  persistLedger();
  res.set_content(json{{"promiseId", id}, {"revision", graph.revision()}}.dump(), kJson);
}

void Service::Impl::getFlows(const httplib::Request& req, httplib::Response& res) {
  if (!req.has_param("src") || !req.has_param("dst")) {
    sendError(res, 400, codes::kMissingField, "src and dst query parameters are required");
    return;
  }
  const std::string src = req.get_param_value("src");
  const std::string dst = req.get_param_value("dst");
  std::shared_lock lock(mutex);
  std::vector<ProtocolStack> stacks;
  try {
    stacks = graph.queryFlow(src, dst);
  } catch (const TopologyError& e) {
    sendError(res, statusFor(e.code()), to_string(e.code()), e.what());
    return;
  }
  json list = json::array();
  for (const auto& s : stacks) list.push_back(json::parse(stackJson(s)));
  res.set_content(json{{"src", src}, {"dst", dst}, {"stacks", list}}.dump(), kJson);
}

void Service::Impl::getReport(httplib::Response& res) {
  std::shared_lock lock(mutex);
  json items = json::array();
  for (const auto& r : graph.redundancyReport()) {
    items.push_back({{"deviceId", r.deviceId},
                     {"ace", r.aceName},
                     {"direction", to_string(r.direction)},
                     {"reason", r.reason}});
  }
  res.set_content(json{{"redundant", items}, {"revision", graph.revision()}}.dump(), kJson);
}

// ---------------------------------------------------------------------------

Service::Service(ServiceOptions options, std::ostream* log)
    : impl_(std::make_unique<Impl>(std::move(options), log)) {
  if (!impl_->options.stateDir.empty()) fs::create_directories(impl_->profileDir());
  impl_->routes();
}

Service::~Service() { stop(); }

std::vector<std::string> Service::restore() {
  std::vector<std::string> warnings;
  const auto& o = impl_->options;
  if (o.stateDir.empty()) return warnings;
  fs::create_directories(impl_->profileDir());

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(impl_->profileDir())) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::unique_lock lock(impl_->mutex);
  for (const auto& f : files) {
    auto parsed = parseMudFile(readAll(f), f.string());
    if (!parsed.profile) {
      warnings.push_back(f.string() + " no longer validates; skipped");
      continue;
    }
    try {
      impl_->graph.addProfile(*parsed.profile);
    } catch (const TopologyError& e) {
      warnings.push_back(f.string() + ": " + e.what());
    }
  }
  if (fs::exists(impl_->ledgerPath())) {
    try {
      const auto result =
          applyPromiseLedger(impl_->graph, readPromiseLedger(readAll(impl_->ledgerPath())));
      for (const auto& u : result.unmatched) warnings.push_back("ledger entry not applied: " + u);
    } catch (const std::invalid_argument& e) {
      warnings.push_back(impl_->ledgerPath().string() + ": " + e.what());
    }
  }
  return warnings;
}

bool Service::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->boundPort = impl_->server.bind_to_any_port(o.host);
    return impl_->boundPort > 0;
  }
  if (!impl_->server.bind_to_port(o.host, o.port)) return false;
  impl_->boundPort = o.port;
  return true;
}

int Service::port() const { return impl_->boundPort; }

void Service::serve() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void Service::flush() {
  std::unique_lock lock(impl_->mutex);
  impl_->persistLedger();
}

int runService(const ServiceOptions& options, std::ostream& log) {
  // Block the signals before any server thread exists so only the waiter sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  Service service(options, &log);
  try {
    for (const auto& w : service.restore()) log << "warning: " << w << '\n';
  } catch (const std::exception& e) {
    log << "error: cannot restore state from " << options.stateDir << ": " << e.what() << '\n';
    return kValidationFailed;
  }
  if (!service.bind()) {
    log << "error: cannot bind " << options.host << ":" << options.port
        << " (address in use)\n";
    return kPortInUse;
  }
  log << "mudscope serving http://" << options.host << ":" << service.port() << " (state "
      << options.stateDir.string() << ")\n";
  log.flush();

  std::atomic<bool> finished{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (!finished) {
      log << "received signal " << sig << ", shutting down\n";
      service.stop();
    }
  });
  service.serve();
  finished = true;
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service.flush();
  log << "state flushed\n";
  return kOk;
}

}  // namespace mudscope::cli
