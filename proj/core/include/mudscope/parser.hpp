#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mudscope/model.hpp"

namespace mudscope {

enum class Severity { Error, Warning, FixedAutomatically };

std::string_view to_string(Severity s);

struct ValidationItem {
  Severity severity = Severity::Error;
  std::string code;
  // JSON pointer into the input document.
  std::string path;
  std::string message;

  friend bool operator==(const ValidationItem&, const ValidationItem&) = default;
};

struct ValidationReport {
  std::string fileRef;
  std::vector<ValidationItem> items;

  bool hasErrors() const;
  std::size_t count(Severity s) const;
  bool contains(std::string_view code) const;
  const ValidationItem* find(std::string_view code) const;

  // One JSON object on a single line, newline terminated.
  std::string toJsonLine() const;
  std::string toText() const;
};

// Error codes.
namespace codes {
inline constexpr std::string_view kMalformedJson = "MalformedJson";
inline constexpr std::string_view kMissingMudContainer = "MissingMudContainer";
inline constexpr std::string_view kMissingField = "MissingField";
inline constexpr std::string_view kInvalidValue = "InvalidValue";
inline constexpr std::string_view kUnresolvedAclReference = "UnresolvedAclReference";
inline constexpr std::string_view kUnsupportedMudVersion = "UnsupportedMudVersion";
inline constexpr std::string_view kConflictingMatch = "ConflictingMatch";
inline constexpr std::string_view kDuplicateAceName = "DuplicateAceName";
inline constexpr std::string_view kUnknownNode = "UnknownNode";
inline constexpr std::string_view kUnsupportedMatch = "UnsupportedMatch";
inline constexpr std::string_view kUnsupportedProtocol = "UnsupportedProtocol";
inline constexpr std::string_view kMissingEndpoint = "MissingEndpoint";
inline constexpr std::string_view kNonAcceptAction = "NonAcceptAction";
inline constexpr std::string_view kFileNotFound = "FileNotFound";
inline constexpr std::string_view kPortCoerced = "PortCoerced";
inline constexpr std::string_view kAceListWrapped = "AceListWrapped";
inline constexpr std::string_view kCanonicalLayout = "CanonicalLayout";
}  // namespace codes

struct ParseResult {
  // Absent whenever the report holds at least one Error.
  std::optional<DeviceProfile> profile;
  ValidationReport report;
};

ParseResult parseMudFile(std::string_view document, std::string fileRef = {});

struct FormatResult {
  // Absent when the input is not JSON.
  std::optional<std::string> text;
  ValidationReport report;
};

// Applies semantics-preserving fixes and emits canonical layout: sorted keys,
// two-space indentation, trailing newline.
FormatResult formatCorrect(std::string_view document, std::string fileRef = {});

// Canonical MUD JSON. Throws std::invalid_argument for stacks that a MUD ACE
// cannot express (multi-protocol layers, multi-range port sets, ports without
// TCP or UDP).
std::string serializeProfile(const DeviceProfile& profile);

}  // namespace mudscope
