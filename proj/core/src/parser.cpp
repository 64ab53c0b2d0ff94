#include "mudscope/parser.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"

namespace mudscope {

using nlohmann::json;

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::FixedAutomatically: return "fixed";
  }
  return "?";
}

bool ValidationReport::hasErrors() const { return count(Severity::Error) > 0; }

std::size_t ValidationReport::count(Severity s) const {
  return static_cast<std::size_t>(std::count_if(
      items.begin(), items.end(), [s](const ValidationItem& i) { return i.severity == s; }));
}

bool ValidationReport::contains(std::string_view code) const { return find(code) != nullptr; }

const ValidationItem* ValidationReport::find(std::string_view code) const {
  for (const auto& i : items) {
    if (i.code == code) return &i;
  }
  return nullptr;
}

std::string ValidationReport::toJsonLine() const {
  json items_json = json::array();
  for (const auto& i : items) {
    items_json.push_back({{"severity", to_string(i.severity)},
                          {"code", i.code},
                          {"path", i.path},
                          {"message", i.message}});
  }
  json out = {{"file", fileRef}, {"ok", !hasErrors()}, {"items", items_json}};
  return out.dump() + "\n";
}

std::string ValidationReport::toText() const {
  std::string out = fileRef + ": " + (hasErrors() ? "INVALID" : "ok");
  out += " (" + std::to_string(count(Severity::Error)) + " errors, " +
         std::to_string(count(Severity::Warning)) + " warnings)\n";
  for (const auto& i : items) {
    out += "  " + std::string(to_string(i.severity)) + " " + i.code + " at '" + i.path +
           "': " + i.message + "\n";
  }
  return out;
}

namespace {

constexpr std::string_view kMudKey = "ietf-mud:mud";
constexpr std::string_view kAclsKey = "ietf-access-control-list:acls";

const std::set<std::string, std::less<>> kKnownMudFields = {
    "mud-version",  "mud-url",       "last-update",        "mud-signature",
    "cache-validity", "is-supported", "systeminfo",        "mfg-name",
    "sw-rev",       "model-name",    "firmware-rev",       "documentation",
    "extensions",   "from-device-policy", "to-device-policy",
};

std::string pointerToken(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string child(const std::string& path, std::string_view key) {
  return path + "/" + pointerToken(key);
}

std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

class Parser {
 public:
  explicit Parser(ValidationReport& report) : report_(report) {}

  std::optional<DeviceProfile> run(const json& doc);

 private:
  struct AclEntry {
    const json* node;
    std::string path;
  };

  void error(std::string_view code, std::string path, std::string message) {
    report_.items.push_back({Severity::Error, std::string(code), std::move(path),
                             std::move(message)});
  }
  void warn(std::string_view code, std::string path, std::string message) {
    report_.items.push_back({Severity::Warning, std::string(code), std::move(path),
                             std::move(message)});
  }

  std::vector<Ace> resolvePolicy(const json& mud, std::string_view policyKey, Direction dir,
                                 const std::map<std::string, AclEntry>& acls);
  std::vector<Ace> parseAcl(const AclEntry& acl, Direction dir);
  std::optional<Ace> parseAce(const json& ace, const std::string& path, Direction dir,
                              const LayerValue& network);
  std::optional<LayerValue> parsePortMatch(const json& node, const std::string& path);

  ValidationReport& report_;
};

std::optional<DeviceProfile> Parser::run(const json& doc) {
  if (!doc.is_object()) {
    error(codes::kMissingMudContainer, "", "document is not a JSON object");
    return std::nullopt;
  }
  auto mudIt = doc.find(kMudKey);
  if (mudIt == doc.end() || !mudIt->is_object()) {
    error(codes::kMissingMudContainer, "", "missing '" + std::string(kMudKey) + "' container");
    return std::nullopt;
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != kMudKey && key != kAclsKey) {
      warn(codes::kUnknownNode, child("", key), "unknown top-level node ignored");
    }
  }

  const json& mud = *mudIt;
  const std::string mudPath = child("", kMudKey);
  DeviceProfile profile;

  for (const auto& [key, value] : mud.items()) {
    if (kKnownMudFields.count(key) == 0) {
      warn(codes::kUnknownNode, child(mudPath, key), "unknown MUD container node ignored");
    }
  }

  auto version = mud.find("mud-version");
  if (version == mud.end()) {
    warn(codes::kUnsupportedMudVersion, child(mudPath, "mud-version"),
         "mud-version missing; assuming 1");
  } else if (!version->is_number_integer() || version->get<long long>() != 1) {
    warn(codes::kUnsupportedMudVersion, child(mudPath, "mud-version"),
         "mud-version " + version->dump() + " is not 1; proceeding");
  }

  auto url = mud.find("mud-url");
  if (url == mud.end() || !url->is_string()) {
    error(codes::kMissingField, child(mudPath, "mud-url"), "mud-url must be a string");
  } else {
    profile.mudUrl = url->get<std::string>();
    profile.authority = uriAuthority(profile.mudUrl);
    if (profile.authority.empty()) {
      error(codes::kInvalidValue, child(mudPath, "mud-url"), "mud-url has no host component");
    }
    profile.id = deviceIdForUrl(profile.mudUrl);
  }

  auto readString = [&](std::string_view key, std::string& out) {
    auto it = mud.find(key);
    if (it == mud.end()) return;
    if (it->is_string()) {
      out = it->get<std::string>();
    } else {
      warn(codes::kInvalidValue, child(mudPath, key), "expected a string; ignored");
    }
  };
  readString("systeminfo", profile.systeminfo);
  readString("mfg-name", profile.mfgName);
  readString("model-name", profile.modelName);

  if (auto it = mud.find("cache-validity"); it != mud.end()) {
    if (it->is_number_integer() && it->get<long long>() >= 1 && it->get<long long>() <= 168) {
      profile.cacheValidity = it->get<int>();
    } else {
      warn(codes::kInvalidValue, child(mudPath, "cache-validity"),
           "cache-validity must be an integer in 1..168; default 48 used");
    }
  }
  if (auto it = mud.find("is-supported"); it != mud.end()) {
    if (it->is_boolean()) {
      profile.isSupported = it->get<bool>();
    } else {
      warn(codes::kInvalidValue, child(mudPath, "is-supported"), "expected a boolean; ignored");
    }
  }

  std::map<std::string, AclEntry> acls;
  if (auto it = doc.find(kAclsKey); it != doc.end()) {
    const std::string aclsPath = child("", kAclsKey);
    auto list = it->is_object() ? it->find("acl") : it->end();
    if (list == it->end() || !list->is_array()) {
      error(codes::kMissingField, child(aclsPath, "acl"), "acl list missing or not an array");
    } else {
      for (std::size_t i = 0; i < list->size(); ++i) {
        const json& acl = (*list)[i];
        const std::string aclPath = child(child(aclsPath, "acl"), i);
        auto name = acl.is_object() ? acl.find("name") : acl.end();
        if (name == acl.end() || !name->is_string()) {
          error(codes::kMissingField, child(aclPath, "name"), "acl without a name");
          continue;
        }
        if (!acls.emplace(name->get<std::string>(), AclEntry{&acl, aclPath}).second) {
          error(codes::kInvalidValue, child(aclPath, "name"),
                "duplicate acl name '" + name->get<std::string>() + "'");
        }
      }
    }
  }

  profile.fromDevice = resolvePolicy(mud, "from-device-policy", Direction::FromDevice, acls);
  profile.toDevice = resolvePolicy(mud, "to-device-policy", Direction::ToDevice, acls);

  if (report_.hasErrors()) return std::nullopt;
  return profile;
}

std::vector<Ace> Parser::resolvePolicy(const json& mud, std::string_view policyKey,
                                       Direction dir,
                                       const std::map<std::string, AclEntry>& acls) {
  std::vector<Ace> out;
  const std::string policyPath = child(child("", kMudKey), policyKey);
  auto policy = mud.find(policyKey);
  if (policy == mud.end()) return out;
  const json* list = nullptr;
  if (policy->is_object()) {
    auto lists = policy->find("access-lists");
    if (lists != policy->end() && lists->is_object()) {
      auto l = lists->find("access-list");
      if (l != lists->end()) list = &*l;
    }
  }
  const std::string listPath = child(child(policyPath, "access-lists"), "access-list");
  if (list == nullptr || !list->is_array()) {
    error(codes::kMissingField, listPath, "policy must hold access-lists/access-list array");
    return out;
  }
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& ref = (*list)[i];
    const std::string refPath = child(child(listPath, i), "name");
    auto name = ref.is_object() ? ref.find("name") : ref.end();
    if (name == ref.end() || !name->is_string()) {
      error(codes::kMissingField, refPath, "access-list reference without a name");
      continue;
    }
    auto acl = acls.find(name->get<std::string>());
    if (acl == acls.end()) {
      error(codes::kUnresolvedAclReference, refPath,
            "policy references acl '" + name->get<std::string>() + "' that is not defined");
      continue;
    }
    auto aces = parseAcl(acl->second, dir);
    out.insert(out.end(), std::make_move_iterator(aces.begin()),
               std::make_move_iterator(aces.end()));
  }
  return out;
}

std::vector<Ace> Parser::parseAcl(const AclEntry& acl, Direction dir) {
  std::vector<Ace> out;
  const json& node = *acl.node;

  LayerValue network = LayerValue::any();
  if (auto type = node.find("type"); type != node.end() && type->is_string()) {
    const auto t = type->get<std::string>();
    if (t == "ipv4-acl-type") {
      network = LayerValue::named(Layer::Network, {Protocol::IPv4});
    } else if (t == "ipv6-acl-type") {
      network = LayerValue::named(Layer::Network, {Protocol::IPv6});
    }
  }

  auto aces = node.find("aces");
  const std::string acePath = child(child(acl.path, "aces"), "ace");
  if (aces == node.end()) return out;
  auto list = aces->is_object() ? aces->find("ace") : aces->end();
  if (list == aces->end() || !list->is_array()) {
    error(codes::kMissingField, acePath, "aces/ace must be an array");
    return out;
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < list->size(); ++i) {
    auto ace = parseAce((*list)[i], child(acePath, i), dir, network);
    if (!ace) continue;
    if (!names.insert(ace->name).second) {
      error(codes::kDuplicateAceName, child(child(acePath, i), "name"),
            "ace name '" + ace->name + "' repeats within its acl");
      continue;
    }
    out.push_back(std::move(*ace));
  }
  return out;
}

std::optional<LayerValue> Parser::parsePortMatch(const json& node, const std::string& path) {
  if (!node.is_object()) {
    error(codes::kInvalidValue, path, "port match must be an object");
    return std::nullopt;
  }
  auto asPort = [&](const char* key, std::optional<std::uint16_t>& out) {
    auto it = node.find(key);
    if (it == node.end()) return false;
    if (!it->is_number_integer() || it->get<long long>() < 0 ||
        it->get<long long>() > kMaxPort) {
      error(codes::kInvalidValue, child(path, key),
            "port must be an integer in 0..65535, got " + it->dump());
      return true;
    }
    out = static_cast<std::uint16_t>(it->get<long long>());
    return true;
  };
  std::optional<std::uint16_t> lower, upper, port;
  const bool hasLower = asPort("lower-port", lower);
  const bool hasUpper = asPort("upper-port", upper);
  const bool hasPort = asPort("port", port);

  if (hasLower || hasUpper) {
    if (!lower || !upper) {
      if (hasLower != hasUpper) {
        error(codes::kMissingField, path, "port range needs lower-port and upper-port");
      }
      return std::nullopt;
    }
    if (*lower > *upper) {
      error(codes::kInvalidValue, path, "lower-port exceeds upper-port");
      return std::nullopt;
    }
    return LayerValue::portRange(*lower, *upper);
  }
  std::string op = "eq";
  if (auto it = node.find("operator"); it != node.end() && it->is_string()) {
    op = it->get<std::string>();
  }
  if (!hasPort) {
    error(codes::kMissingField, child(path, "port"), "port match without a port");
    return std::nullopt;
  }
  if (!port) return std::nullopt;
  if (op != "eq") {
    warn(codes::kUnsupportedMatch, child(path, "operator"),
         "operator '" + op + "' not supported; layer treated as any");
    return LayerValue::any();
  }
  return LayerValue::port(*port);
}

std::optional<Ace> Parser::parseAce(const json& ace, const std::string& path, Direction dir,
                                    const LayerValue& network) {
  if (!ace.is_object()) {
    error(codes::kInvalidValue, path, "ace must be an object");
    return std::nullopt;
  }
  const std::size_t errorsBefore = report_.count(Severity::Error);
  Ace out;
  auto name = ace.find("name");
  if (name == ace.end() || !name->is_string() || name->get<std::string>().empty()) {
    error(codes::kMissingField, child(path, "name"), "ace without a name");
  } else {
    out.name = name->get<std::string>();
  }

  if (auto actions = ace.find("actions"); actions != ace.end()) {
    auto fwd = actions->is_object() ? actions->find("forwarding") : actions->end();
    if (fwd == actions->end() || !fwd->is_string() ||
        (fwd->get<std::string>() != "accept" &&
         fwd->get<std::string>() != "ietf-access-control-list:accept")) {
      warn(codes::kNonAcceptAction, child(path, "actions"),
           "MUD entries are permit rules; non-accept forwarding treated as accept");
    }
  }

  ProtocolStack stack{network, LayerValue::any(), LayerValue::any(), LayerValue::any(), dir};
  std::vector<AceEndpoint> endpoints;
  const std::string matchesPath = child(path, "matches");
  auto matches = ace.find("matches");
  if (matches == ace.end() || !matches->is_object()) {
    error(codes::kMissingField, matchesPath, "ace without a matches object");
    return std::nullopt;
  }

  std::optional<Protocol> protocolFromNumber;
  std::optional<Protocol> protocolFromContainer;
  std::string l3Key;

  for (const auto& [key, value] : matches->items()) {
    const std::string p = child(matchesPath, key);
    if (key == "ipv4" || key == "ipv6") {
      if (!l3Key.empty()) {
        error(codes::kConflictingMatch, p, "ace matches both ipv4 and ipv6");
        continue;
      }
      l3Key = key;
      const Protocol family = key == "ipv4" ? Protocol::IPv4 : Protocol::IPv6;
      if (!network.isAny() && !network.contains(family)) {
        warn(codes::kConflictingMatch, p, key + " match inside an acl of the other family");
      }
      if (!value.is_object()) {
        error(codes::kInvalidValue, p, "expected an object");
        continue;
      }
      for (const auto& [k, v] : value.items()) {
        const std::string kp = child(p, k);
        if (k == "protocol") {
          if (!v.is_number_integer()) {
            error(codes::kInvalidValue, kp, "protocol must be an integer");
            continue;
          }
          switch (v.get<long long>()) {
            case 6: protocolFromNumber = Protocol::TCP; break;
            case 17: protocolFromNumber = Protocol::UDP; break;
            case 1:
            case 58: protocolFromNumber = Protocol::ICMP; break;
            default:
              warn(codes::kUnsupportedProtocol, kp,
                   "protocol " + v.dump() + " not modelled; transport treated as any");
          }
        } else if (k == "ietf-acldns:dst-dnsname" || k == "ietf-acldns:src-dnsname" ||
                   k == "dst-dnsname" || k == "src-dnsname") {
          if (!v.is_string() || v.get<std::string>().empty()) {
            error(codes::kInvalidValue, kp, "dnsname must be a non-empty string");
            continue;
          }
          const bool isDst = k.find("dst-") != std::string::npos;
          if (isDst != (dir == Direction::FromDevice)) {
            warn(codes::kUnsupportedMatch, kp,
                 std::string(isDst ? "dst" : "src") + "-dnsname in a " +
                     std::string(to_string(dir)) + " acl");
          }
          endpoints.push_back({EndpointKind::DomainName, v.get<std::string>()});
        } else {
          warn(codes::kUnsupportedMatch, kp, "match field not modelled; layer treated as any");
        }
      }
    } else if (key == "tcp" || key == "udp") {
      if (protocolFromContainer) {
        error(codes::kConflictingMatch, p, "ace carries more than one transport container");
        continue;
      }
      protocolFromContainer = key == "tcp" ? Protocol::TCP : Protocol::UDP;
      if (!value.is_object()) {
        error(codes::kInvalidValue, p, "expected an object");
        continue;
      }
      for (const auto& [k, v] : value.items()) {
        const std::string kp = child(p, k);
        if (k == "source-port") {
          if (auto ports = parsePortMatch(v, kp)) stack.srcPort = *ports;
        } else if (k == "destination-port") {
          if (auto ports = parsePortMatch(v, kp)) stack.dstPort = *ports;
        } else if (k == "ietf-mud:direction-initiated" || k == "direction-initiated") {
          // TCP initiation direction does not take part in merging.
        } else {
          warn(codes::kUnsupportedMatch, kp, "match field not modelled; ignored");
        }
      }
    } else if (key == "icmp") {
      if (protocolFromContainer) {
        error(codes::kConflictingMatch, p, "ace carries more than one transport container");
        continue;
      }
      protocolFromContainer = Protocol::ICMP;
    } else if (key == "ietf-mud:mud" || key == "mud") {
      if (!value.is_object()) {
        error(codes::kInvalidValue, p, "expected an object");
        continue;
      }
      for (const auto& [k, v] : value.items()) {
        const std::string kp = child(p, k);
        auto kind = endpointKindFromString(k);
        if (!kind || *kind == EndpointKind::DomainName) {
          warn(codes::kUnknownNode, kp, "unknown MUD match extension ignored");
          continue;
        }
        if (endpointCarriesValue(*kind)) {
          if (!v.is_string() || v.get<std::string>().empty()) {
            error(codes::kInvalidValue, kp, k + " requires a non-empty string");
            continue;
          }
          endpoints.push_back({*kind, v.get<std::string>()});
        } else {
          endpoints.push_back({*kind, {}});
        }
      }
    } else {
      warn(codes::kUnsupportedMatch, p, "match container not modelled; layer treated as any");
    }
  }

  if (protocolFromNumber && protocolFromContainer && protocolFromNumber != protocolFromContainer) {
    error(codes::kConflictingMatch, matchesPath, "protocol number disagrees with container");
  }
  if (auto proto = protocolFromContainer ? protocolFromContainer : protocolFromNumber) {
    stack.transport = LayerValue::named(Layer::Transport, {*proto});
    if (*proto == Protocol::ICMP) {
      stack.srcPort = LayerValue::any();
      stack.dstPort = LayerValue::any();
    }
  }

  if (endpoints.size() > 1) {
    std::string names;
    for (const auto& e : endpoints) {
      if (!names.empty()) names += ", ";
      names += to_string(e.kind);
    }
    error(codes::kConflictingMatch, matchesPath,
          "ace carries more than one endpoint abstraction: " + names);
  } else if (endpoints.empty()) {
    warn(codes::kMissingEndpoint, matchesPath,
         "no endpoint abstraction; treated as domain-name '*' (open Internet)");
    out.endpoint = {EndpointKind::DomainName, "*"};
  } else {
    out.endpoint = endpoints.front();
  }

  if (report_.count(Severity::Error) != errorsBefore) return std::nullopt;
  out.stack = std::move(stack);
  return out;
}

// ---------------------------------------------------------------------------
// Format correction

std::string canonicalText(const json& doc) { return doc.dump(2) + "\n"; }

bool isDigits(const std::string& s) {
  return !s.empty() && s.size() <= 5 &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

void fixTree(json& node, const std::string& path, ValidationReport& report) {
  if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) fixTree(node[i], child(path, i), report);
    return;
  }
  if (!node.is_object()) return;
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string& key = it.key();
    json& value = it.value();
    const std::string p = child(path, key);
    const bool portKey = key == "port" || key == "lower-port" || key == "upper-port";
    if ((portKey || key == "protocol") && value.is_string() &&
        isDigits(value.get<std::string>())) {
      const long v = std::stol(value.get<std::string>());
      if (v <= (key == "protocol" ? 255 : kMaxPort)) {
        report.items.push_back({Severity::FixedAutomatically, std::string(codes::kPortCoerced),
                                p, "string \"" + value.get<std::string>() +
                                       "\" coerced to integer"});
        value = v;
      }
    }
    if (key == "aces" && value.is_object()) {
      auto ace = value.find("ace");
      if (ace != value.end() && ace->is_object()) {
        *ace = json::array({*ace});
        report.items.push_back({Severity::FixedAutomatically,
                                std::string(codes::kAceListWrapped), child(p, "ace"),
                                "single ace object wrapped in a list"});
      } else if (ace == value.end() && (value.contains("matches") || value.contains("name"))) {
        value = json{{"ace", json::array({value})}};
        report.items.push_back({Severity::FixedAutomatically,
                                std::string(codes::kAceListWrapped), p,
                                "bare ace object wrapped in an ace list"});
      }
    }
    fixTree(value, p, report);
  }
}

}  // namespace

ParseResult parseMudFile(std::string_view document, std::string fileRef) {
  ParseResult result;
  result.report.fileRef = std::move(fileRef);
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    result.report.items.push_back(
        {Severity::Error, std::string(codes::kMalformedJson), "", e.what()});
    return result;
  }
  Parser parser(result.report);
  result.profile = parser.run(doc);
  return result;
}

FormatResult formatCorrect(std::string_view document, std::string fileRef) {
  FormatResult result;
  result.report.fileRef = std::move(fileRef);
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    result.report.items.push_back(
        {Severity::Error, std::string(codes::kMalformedJson), "", e.what()});
    return result;
  }
  const bool layoutCanonical = canonicalText(doc) == document;
  fixTree(doc, "", result.report);
  if (!layoutCanonical) {
    result.report.items.push_back({Severity::FixedAutomatically,
                                   std::string(codes::kCanonicalLayout), "",
                                   "keys sorted and whitespace normalized"});
  }
  result.text = canonicalText(doc);
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json portMatch(const LayerValue& v) {
  const auto& r = v.ranges();
  if (r.size() != 1) throw std::invalid_argument("port set " + v.toString() + " spans ranges");
  if (r.front().lo == r.front().hi) return {{"operator", "eq"}, {"port", r.front().lo}};
  return {{"lower-port", r.front().lo}, {"upper-port", r.front().hi}};
}

json aceJson(const Ace& ace) {
  const auto& s = ace.stack;
  json matches = json::object();
  const auto& ep = ace.endpoint;
  if (ep.kind == EndpointKind::DomainName) {
    if (ep.value != "*") {
      const std::string l3 = s.network.contains(Protocol::IPv4) ? "ipv4" : "ipv6";
      const std::string key = s.direction == Direction::FromDevice ? "ietf-acldns:dst-dnsname"
                                                                    : "ietf-acldns:src-dnsname";
      matches[l3][key] = ep.value;
    }
  } else if (endpointCarriesValue(ep.kind)) {
    matches["ietf-mud:mud"][std::string(to_string(ep.kind))] = ep.value;
  } else {
    matches["ietf-mud:mud"][std::string(to_string(ep.kind))] = json::array({nullptr});
  }

  const bool ports = !s.srcPort.isAny() || !s.dstPort.isAny();
  if (s.transport.isAny()) {
    if (ports) throw std::invalid_argument("ports without a transport protocol in " + ace.name);
  } else {
    const auto protocols = s.transport.protocols();
    if (protocols.size() != 1) {
      throw std::invalid_argument("multi-protocol transport in " + ace.name);
    }
    if (protocols.front() == Protocol::ICMP) {
      matches["icmp"] = json::object();
    } else {
      json l4 = json::object();
      if (!s.srcPort.isAny()) l4["source-port"] = portMatch(s.srcPort);
      if (!s.dstPort.isAny()) l4["destination-port"] = portMatch(s.dstPort);
      matches[protocols.front() == Protocol::TCP ? "tcp" : "udp"] = l4;
    }
  }
  return {{"name", ace.name}, {"matches", matches}, {"actions", {{"forwarding", "accept"}}}};
}

std::string aclType(const LayerValue& network) {
  if (network.isAny()) return "mixed-eth-ipv4-ipv6-acl-type";
  return network.contains(Protocol::IPv4) ? "ipv4-acl-type" : "ipv6-acl-type";
}

// Consecutive ACEs sharing a network layer go into one ACL so ACE order survives.
void appendAcls(const std::vector<Ace>& aces, const std::string& prefix, json& aclList,
                json& refs) {
  std::size_t i = 0;
  int index = 0;
  while (i < aces.size()) {
    const LayerValue& network = aces[i].stack.network;
    json list = json::array();
    for (; i < aces.size() && aces[i].stack.network == network; ++i) {
      list.push_back(aceJson(aces[i]));
    }
    const std::string name = prefix + "-" + std::to_string(index++);
    aclList.push_back({{"name", name}, {"type", aclType(network)}, {"aces", {{"ace", list}}}});
    refs.push_back({{"name", name}});
  }
}

}  // namespace

std::string serializeProfile(const DeviceProfile& profile) {
  json aclList = json::array();
  json fromRefs = json::array();
  json toRefs = json::array();
  appendAcls(profile.fromDevice, "from-device-acl", aclList, fromRefs);
  appendAcls(profile.toDevice, "to-device-acl", aclList, toRefs);

  json mud = {
      {"mud-version", 1},
      {"mud-url", profile.mudUrl},
      {"cache-validity", profile.cacheValidity},
      {"is-supported", profile.isSupported},
      {"from-device-policy", {{"access-lists", {{"access-list", fromRefs}}}}},
      {"to-device-policy", {{"access-lists", {{"access-list", toRefs}}}}},
  };
  if (!profile.systeminfo.empty()) mud["systeminfo"] = profile.systeminfo;
  if (!profile.mfgName.empty()) mud["mfg-name"] = profile.mfgName;
  if (!profile.modelName.empty()) mud["model-name"] = profile.modelName;

  json doc = {{std::string(kMudKey), mud}, {std::string(kAclsKey), {{"acl", aclList}}}};
  return canonicalText(doc);
}

}  // namespace mudscope
