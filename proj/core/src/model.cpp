#include "mudscope/model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace mudscope {

namespace {

constexpr std::uint8_t kNetworkMask =
    static_cast<std::uint8_t>(Protocol::IPv4) | static_cast<std::uint8_t>(Protocol::IPv6);
constexpr std::uint8_t kTransportMask = static_cast<std::uint8_t>(Protocol::TCP) |
                                        static_cast<std::uint8_t>(Protocol::UDP) |
                                        static_cast<std::uint8_t>(Protocol::ICMP);

constexpr Protocol kProtocolOrder[] = {Protocol::IPv4, Protocol::IPv6, Protocol::TCP,
                                       Protocol::UDP, Protocol::ICMP};

std::uint8_t bit(Protocol p) { return static_cast<std::uint8_t>(p); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::uint16_t parsePort(std::string_view s) {
  s = trim(s);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value > kMaxPort || s.empty()) {
    throw std::invalid_argument("invalid port '" + std::string(s) + "'");
  }
  return static_cast<std::uint16_t>(value);
}

}  // namespace

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::IPv4: return "IPv4";
    case Protocol::IPv6: return "IPv6";
    case Protocol::TCP: return "TCP";
    case Protocol::UDP: return "UDP";
    case Protocol::ICMP: return "ICMP";
  }
  return "?";
}

std::optional<Protocol> protocolFromString(std::string_view s) {
  for (Protocol p : kProtocolOrder) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::Network: return "network";
    case Layer::Transport: return "transport";
    case Layer::SrcPort: return "srcPort";
    case Layer::DstPort: return "dstPort";
  }
  return "?";
}

bool isNamedLayer(Layer layer) { return layer == Layer::Network || layer == Layer::Transport; }

std::uint8_t layerUniverseMask(Layer layer) {
  switch (layer) {
    case Layer::Network: return kNetworkMask;
    case Layer::Transport: return kTransportMask;
    default: return 0;
  }
}

// ---------------------------------------------------------------------------

LayerValue LayerValue::named(Layer layer, std::initializer_list<Protocol> protocols) {
  std::uint8_t mask = 0;
  for (Protocol p : protocols) mask |= bit(p);
  return namedMask(layer, mask);
}

LayerValue LayerValue::namedMask(Layer layer, std::uint8_t mask) {
  if (!isNamedLayer(layer)) throw std::invalid_argument("named value on a port layer");
  const std::uint8_t universe = layerUniverseMask(layer);
  if (mask == 0) throw std::invalid_argument("empty protocol set");
  if ((mask & ~universe) != 0) {
    throw std::invalid_argument("protocol does not belong to layer " +
                                std::string(mudscope::to_string(layer)));
  }
  LayerValue v;
  if (mask == universe) return v;
  v.kind_ = Kind::Named;
  v.mask_ = mask;
  return v;
}

LayerValue LayerValue::ports(std::vector<PortRange> ranges) {
  if (ranges.empty()) throw std::invalid_argument("empty port set");
  for (const auto& r : ranges) {
    if (r.lo > r.hi) throw std::invalid_argument("inverted port range");
  }
  std::sort(ranges.begin(), ranges.end());
  std::vector<PortRange> merged;
  for (const auto& r : ranges) {
    if (!merged.empty() && static_cast<unsigned>(merged.back().hi) + 1 >= r.lo) {
      merged.back().hi = std::max(merged.back().hi, r.hi);
    } else {
      merged.push_back(r);
    }
  }
  LayerValue v;
  if (merged.size() == 1 && merged.front().lo == 0 && merged.front().hi == kMaxPort) return v;
  v.kind_ = Kind::PortSet;
  v.ranges_ = std::move(merged);
  return v;
}

LayerValue LayerValue::parse(Layer layer, std::string_view text) {
  text = trim(text);
  if (text == "any") return any();
  if (isNamedLayer(layer)) {
    std::uint8_t mask = 0;
    while (!text.empty()) {
      auto bar = text.find('|');
      auto token = trim(text.substr(0, bar));
      auto p = protocolFromString(token);
      if (!p) throw std::invalid_argument("unknown protocol '" + std::string(token) + "'");
      mask |= bit(*p);
      text = bar == std::string_view::npos ? std::string_view{} : text.substr(bar + 1);
    }
    return namedMask(layer, mask);
  }
  std::vector<PortRange> ranges;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto token = trim(text.substr(0, comma));
    auto dash = token.find('-');
    if (dash == std::string_view::npos) {
      auto p = parsePort(token);
      ranges.push_back({p, p});
    } else {
      ranges.push_back({parsePort(token.substr(0, dash)), parsePort(token.substr(dash + 1))});
    }
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  return ports(std::move(ranges));
}

std::vector<Protocol> LayerValue::protocols() const {
  std::vector<Protocol> out;
  for (Protocol p : kProtocolOrder) {
    if (mask_ & bit(p)) out.push_back(p);
  }
  return out;
}

int LayerValue::protocolCount() const {
  int n = 0;
  for (std::uint8_t m = mask_; m != 0; m &= static_cast<std::uint8_t>(m - 1)) ++n;
  return n;
}

bool LayerValue::contains(Protocol p) const {
  return kind_ == Kind::Any || (kind_ == Kind::Named && (mask_ & bit(p)) != 0);
}

bool LayerValue::contains(std::uint16_t port) const {
  if (kind_ == Kind::Any) return true;
  if (kind_ != Kind::PortSet) return false;
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [port](const PortRange& r) { return r.lo <= port && port <= r.hi; });
}

std::string LayerValue::toString() const {
  switch (kind_) {
    case Kind::Any: return "any";
    case Kind::Named: {
      std::string out;
      for (Protocol p : protocols()) {
        if (!out.empty()) out += '|';
        out += mudscope::to_string(p);
      }
      return out;
    }
    case Kind::PortSet: {
      std::string out;
      for (const auto& r : ranges_) {
        if (!out.empty()) out += ',';
        out += std::to_string(r.lo);
        if (r.hi != r.lo) out += '-' + std::to_string(r.hi);
      }
      return out;
    }
  }
  return {};
}

std::strong_ordering operator<=>(const LayerValue& a, const LayerValue& b) {
  if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
  if (auto c = a.mask_ <=> b.mask_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.ranges_.begin(), a.ranges_.end(),
                                                b.ranges_.begin(), b.ranges_.end());
}

// ---------------------------------------------------------------------------

std::string_view to_string(Direction d) {
  return d == Direction::FromDevice ? "from-device" : "to-device";
}

const LayerValue& ProtocolStack::layer(Layer l) const {
  switch (l) {
    case Layer::Network: return network;
    case Layer::Transport: return transport;
    case Layer::SrcPort: return srcPort;
    case Layer::DstPort: return dstPort;
  }
  return network;
}

LayerValue& ProtocolStack::layer(Layer l) {
  return const_cast<LayerValue&>(std::as_const(*this).layer(l));
}

bool ProtocolStack::sameLayers(const ProtocolStack& other) const {
  return network == other.network && transport == other.transport &&
         srcPort == other.srcPort && dstPort == other.dstPort;
}

ProtocolStack ProtocolStack::withDirection(Direction d) const {
  ProtocolStack copy = *this;
  copy.direction = d;
  return copy;
}

std::string ProtocolStack::toString() const {
  return "[" + network.toString() + ", " + transport.toString() + ", " + srcPort.toString() +
         ", " + dstPort.toString() + "]";
}

ProtocolStack makeStack(std::string_view network, std::string_view transport,
                        std::string_view srcPort, std::string_view dstPort,
                        Direction direction) {
  return ProtocolStack{LayerValue::parse(Layer::Network, network),
                       LayerValue::parse(Layer::Transport, transport),
                       LayerValue::parse(Layer::SrcPort, srcPort),
                       LayerValue::parse(Layer::DstPort, dstPort), direction};
}

// ---------------------------------------------------------------------------

std::string_view to_string(EndpointKind k) {
  switch (k) {
    case EndpointKind::DomainName: return "domain-name";
    case EndpointKind::LocalNetworks: return "local-networks";
    case EndpointKind::Manufacturer: return "manufacturer";
    case EndpointKind::SameManufacturer: return "same-manufacturer";
    case EndpointKind::Controller: return "controller";
    case EndpointKind::MyController: return "my-controller";
    case EndpointKind::Model: return "model";
  }
  return "?";
}

std::optional<EndpointKind> endpointKindFromString(std::string_view s) {
  for (EndpointKind k : kAllEndpointKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool endpointCarriesValue(EndpointKind k) {
  return k == EndpointKind::DomainName || k == EndpointKind::Manufacturer ||
         k == EndpointKind::Controller || k == EndpointKind::Model;
}

AceEndpoint AceEndpoint::make(EndpointKind kind, std::string value) {
  if (endpointCarriesValue(kind) == value.empty()) {
    throw std::invalid_argument("endpoint '" + std::string(to_string(kind)) +
                                (value.empty() ? "' requires a value" : "' takes no value"));
  }
  return AceEndpoint{kind, std::move(value)};
}

// ---------------------------------------------------------------------------

std::string uriAuthority(std::string_view uri) {
  auto scheme = uri.find("://");
  if (scheme == std::string_view::npos) return {};
  auto rest = uri.substr(scheme + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (auto at = rest.rfind('@'); at != std::string_view::npos) rest = rest.substr(at + 1);
  if (!rest.empty() && rest.front() == '[') {
    rest = rest.substr(0, rest.find(']') + 1);
  } else if (auto colon = rest.find(':'); colon != std::string_view::npos) {
    rest = rest.substr(0, colon);
  }
  std::string host(rest);
  std::transform(host.begin(), host.end(), host.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return host;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {
std::string hex(std::uint64_t v, int digits) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf + 16 - digits, buf + 16);
}
}  // namespace

std::string deviceIdForUrl(std::string_view mudUrl) { return "d-" + hex(fnv1a64(mudUrl), 12); }

std::string_view to_string(ControllerKind k) {
  return k == ControllerKind::Controller ? "controller" : "my-controller";
}

std::string promiseIdFor(std::string_view deviceId, ControllerKind kind,
                         std::string_view classUri) {
  std::string key(deviceId);
  key += '\n';
  key += to_string(kind);
  key += '\n';
  key += classUri;
  return "p-" + hex(fnv1a64(key), 12);
}

// ---------------------------------------------------------------------------

Universe Universe::covering(const std::vector<ProtocolStack>& stacks) {
  std::set<std::uint16_t> ports;
  for (const auto& s : stacks) {
    for (const auto* v : {&s.srcPort, &s.dstPort}) {
      // Interval boundaries on both sides split the port line into segments
      // on which every stack's membership is constant.
      for (const auto& r : v->ranges()) {
        ports.insert(r.lo);
        ports.insert(r.hi);
        if (r.lo > 0) ports.insert(static_cast<std::uint16_t>(r.lo - 1));
        if (r.hi < kMaxPort) ports.insert(static_cast<std::uint16_t>(r.hi + 1));
      }
    }
  }
  std::uint16_t sentinel = 1;
  while (ports.count(sentinel) != 0) ++sentinel;
  ports.insert(sentinel);
  Universe u;
  u.srcPorts.assign(ports.begin(), ports.end());
  u.dstPorts = u.srcPorts;
  return u;
}

std::set<ConcreteTuple> concretize(const ProtocolStack& stack, const Universe& universe) {
  std::set<ConcreteTuple> out;
  for (Protocol n : universe.networks) {
    if (!stack.network.contains(n)) continue;
    for (Protocol t : universe.transports) {
      if (!stack.transport.contains(t)) continue;
      for (std::uint16_t sp : universe.srcPorts) {
        if (!stack.srcPort.contains(sp)) continue;
        for (std::uint16_t dp : universe.dstPorts) {
          if (stack.dstPort.contains(dp)) out.insert({n, t, sp, dp});
        }
      }
    }
  }
  return out;
}

std::set<ConcreteTuple> concretizeAll(const std::vector<ProtocolStack>& stacks,
                                      const Universe& universe) {
  std::set<ConcreteTuple> out;
  for (const auto& s : stacks) out.merge(concretize(s, universe));
  return out;
}

}  // namespace mudscope
