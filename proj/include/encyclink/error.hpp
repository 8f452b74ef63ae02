#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace encyclink {

enum class Errc {
  MalformedPage,
  EmptyReference,
  EmptyText,
  SingleClassTraining,
  MissingEmbedding,
  ProviderUnavailable,
  ZeroVector,
  DimMismatch,
  GoldIdUnknown,
  ApiUnavailable,
  FixtureMiss,
  MalformedClaim,
  RangeError,
  IoError,
  MissingUpstream,
  ConfigError,
  SchemaMismatch,
  FormatError,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures are reported with this exception; the code tells
// callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace encyclink
