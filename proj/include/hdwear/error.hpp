#pragma once

// Error type shared by every hdwear module. Each failure carries an ErrorKind so
// callers (and the CLI exit-code table) can dispatch without parsing messages.

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdwear {

enum class ErrorKind {
  kInvalidDimension,
  kInvalidArgument,
  kUndefinedSimilarity,
  kUnknownSymbol,
  kInvalidSample,
  kUnknownClass,
  kModelNotTrained,
  kEmptyDataset,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kChecksumMismatch,
  kIo,
  kSchema,
  kParse,
  kEmptyInput,
  kConfigMismatch,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidDimension: return "invalid-dimension";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kUndefinedSimilarity: return "undefined-similarity";
    case ErrorKind::kUnknownSymbol: return "unknown-symbol";
    case ErrorKind::kInvalidSample: return "invalid-sample";
    case ErrorKind::kUnknownClass: return "unknown-class";
    case ErrorKind::kModelNotTrained: return "model-not-trained";
    case ErrorKind::kEmptyDataset: return "empty-dataset";
    case ErrorKind::kBadMagic: return "bad-magic";
    case ErrorKind::kUnsupportedVersion: return "unsupported-version";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kChecksumMismatch: return "checksum-mismatch";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kConfigMismatch: return "configuration-mismatch";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {
inline void require(bool condition, ErrorKind kind, const char* message) {
  if (!condition) throw Error(kind, message);
}
}  // namespace detail

}  // namespace hdwear
