#include "encyclink/error.hpp"

namespace encyclink {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedPage: return "MalformedPage";
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::EmptyText: return "EmptyText";
    case Errc::SingleClassTraining: return "SingleClassTraining";
    case Errc::MissingEmbedding: return "MissingEmbedding";
    case Errc::ProviderUnavailable: return "ProviderUnavailable";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::GoldIdUnknown: return "GoldIdUnknown";
    case Errc::ApiUnavailable: return "ApiUnavailable";
    case Errc::FixtureMiss: return "FixtureMiss";
    case Errc::MalformedClaim: return "MalformedClaim";
    case Errc::RangeError: return "RangeError";
    case Errc::IoError: return "IoError";
    case Errc::MissingUpstream: return "MissingUpstream";
    case Errc::ConfigError: return "ConfigError";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::FormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace encyclink
