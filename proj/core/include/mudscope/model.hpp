#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace mudscope {

// Protocol identifiers of the two named layers. Values double as bit flags.
enum class Protocol : std::uint8_t {
  IPv4 = 1 << 0,
  IPv6 = 1 << 1,
  TCP = 1 << 2,
  UDP = 1 << 3,
  ICMP = 1 << 4,
};

enum class Layer : std::uint8_t { Network = 0, Transport = 1, SrcPort = 2, DstPort = 3 };

inline constexpr int kLayerCount = 4;
inline constexpr std::uint16_t kMaxPort = 65535;

std::string_view to_string(Protocol p);
std::optional<Protocol> protocolFromString(std::string_view s);
std::string_view to_string(Layer layer);

bool isNamedLayer(Layer layer);
// Bitmask of every protocol that belongs to a named layer.
std::uint8_t layerUniverseMask(Layer layer);

struct PortRange {
  std::uint16_t lo = 0;
  std::uint16_t hi = 0;

  friend auto operator<=>(const PortRange&, const PortRange&) = default;
};

class LayerMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A value at one protocol-stack layer: "any", a set of protocols, or a set of
// ports. Instances are always normalized, so equal concretizations compare
// equal: full-universe sets collapse to Any, port ranges are sorted and
// coalesced, and empty sets cannot be constructed.
class LayerValue {
 public:
  enum class Kind : std::uint8_t { Any, Named, PortSet };

  static LayerValue any() { return LayerValue{}; }
  // Throws std::invalid_argument for an empty set or protocols of another layer.
  static LayerValue named(Layer layer, std::initializer_list<Protocol> protocols);
  static LayerValue namedMask(Layer layer, std::uint8_t mask);
  static LayerValue ports(std::vector<PortRange> ranges);
  static LayerValue port(std::uint16_t p) { return ports({{p, p}}); }
  static LayerValue portRange(std::uint16_t lo, std::uint16_t hi) { return ports({{lo, hi}}); }

  // Parses the rendering produced by toString(): "any", "TCP", "TCP|UDP",
  // "80", "1000-2000", "80,443". Throws std::invalid_argument.
  static LayerValue parse(Layer layer, std::string_view text);

  Kind kind() const { return kind_; }
  bool isAny() const { return kind_ == Kind::Any; }
  std::uint8_t mask() const { return mask_; }
  const std::vector<PortRange>& ranges() const { return ranges_; }
  std::vector<Protocol> protocols() const;
  // Number of named protocols, 0 unless kind() == Named.
  int protocolCount() const;

  bool contains(Protocol p) const;
  bool contains(std::uint16_t port) const;

  // "any", "IPv4", "TCP|UDP", "5000", "4000-6000", "80,443".
  std::string toString() const;

  friend bool operator==(const LayerValue&, const LayerValue&) = default;
  friend std::strong_ordering operator<=>(const LayerValue& a, const LayerValue& b);

 private:
  Kind kind_ = Kind::Any;
  std::uint8_t mask_ = 0;
  std::vector<PortRange> ranges_;
};

enum class Direction : std::uint8_t { FromDevice, ToDevice };

std::string_view to_string(Direction d);

// One ACE's four-layer tuple. Direction is metadata and never takes part in
// layer algebra.
struct ProtocolStack {
  LayerValue network;
  LayerValue transport;
  LayerValue srcPort;
  LayerValue dstPort;
  Direction direction = Direction::FromDevice;

  const LayerValue& layer(Layer l) const;
  LayerValue& layer(Layer l);

  bool sameLayers(const ProtocolStack& other) const;
  ProtocolStack withDirection(Direction d) const;

  // "[IPv4, UDP, 5000, 400]"
  std::string toString() const;

  friend bool operator==(const ProtocolStack&, const ProtocolStack&) = default;
};

// Layer-only rendering helpers for readable literals in code and tests:
// stack("IPv4", "UDP", "any", "any").
ProtocolStack makeStack(std::string_view network, std::string_view transport,
                        std::string_view srcPort, std::string_view dstPort,
                        Direction direction = Direction::FromDevice);

enum class EndpointKind : std::uint8_t {
  DomainName,
  LocalNetworks,
  Manufacturer,
  SameManufacturer,
  Controller,
  MyController,
  Model,
};

inline constexpr EndpointKind kAllEndpointKinds[] = {
    EndpointKind::DomainName, EndpointKind::LocalNetworks, EndpointKind::Manufacturer,
    EndpointKind::SameManufacturer, EndpointKind::Controller, EndpointKind::MyController,
    EndpointKind::Model,
};

// MUD extension names: "domain-name", "local-networks", ...
std::string_view to_string(EndpointKind k);
std::optional<EndpointKind> endpointKindFromString(std::string_view s);
bool endpointCarriesValue(EndpointKind k);

struct AceEndpoint {
  EndpointKind kind = EndpointKind::DomainName;
  std::string value;

  // Throws std::invalid_argument when value presence disagrees with kind.
  static AceEndpoint make(EndpointKind kind, std::string value = {});

  friend auto operator<=>(const AceEndpoint&, const AceEndpoint&) = default;
};

struct Ace {
  std::string name;
  AceEndpoint endpoint;
  ProtocolStack stack;

  friend bool operator==(const Ace&, const Ace&) = default;
};

struct DeviceProfile {
  std::string id;
  std::string mudUrl;
  std::string authority;
  std::string systeminfo;
  std::string mfgName;
  std::string modelName;
  int cacheValidity = 48;
  bool isSupported = true;
  std::vector<Ace> fromDevice;
  std::vector<Ace> toDevice;

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

// Lowercased host component of a URI, "" when there is none.
std::string uriAuthority(std::string_view uri);
// Stable identifier derived from a MUD-URL ("d-" + 12 hex digits).
std::string deviceIdForUrl(std::string_view mudUrl);
// 64-bit FNV-1a, used for stable identifiers.
std::uint64_t fnv1a64(std::string_view data);

enum class ControllerKind : std::uint8_t { Controller, MyController };

std::string_view to_string(ControllerKind k);

struct ControllerPromise {
  std::string promiseId;
  std::string deviceId;
  ControllerKind kind = ControllerKind::Controller;
  std::string classUri;
  std::vector<std::string> assignedHosts;
  // Traffic the device may send to the class, and receive from it.
  std::vector<ProtocolStack> outbound;
  std::vector<ProtocolStack> inbound;
  std::vector<std::string> aceNames;

  bool pending() const { return assignedHosts.empty(); }

  friend bool operator==(const ControllerPromise&, const ControllerPromise&) = default;
};

std::string promiseIdFor(std::string_view deviceId, ControllerKind kind, std::string_view classUri);

// ---------------------------------------------------------------------------
// Concretization: finite expansion used by brute-force checks.

struct Universe {
  std::vector<Protocol> networks{Protocol::IPv4, Protocol::IPv6};
  std::vector<Protocol> transports{Protocol::TCP, Protocol::UDP, Protocol::ICMP};
  std::vector<std::uint16_t> srcPorts;
  std::vector<std::uint16_t> dstPorts;

  // Ports mentioned by the stacks plus one sentinel port absent from all of
  // them, for both port layers.
  static Universe covering(const std::vector<ProtocolStack>& stacks);
};

struct ConcreteTuple {
  Protocol network;
  Protocol transport;
  std::uint16_t srcPort;
  std::uint16_t dstPort;

  friend auto operator<=>(const ConcreteTuple&, const ConcreteTuple&) = default;
};

std::set<ConcreteTuple> concretize(const ProtocolStack& stack, const Universe& universe);
std::set<ConcreteTuple> concretizeAll(const std::vector<ProtocolStack>& stacks,
                                      const Universe& universe);

}  // namespace mudscope
