#include "fastbasin/error.hpp"

namespace fastbasin {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::SingularMap: return "SingularMap";
    case ErrorKind::MixedSpaces: return "MixedSpaces";
    case ErrorKind::OutsideImage: return "OutsideImage";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NotExpansive: return "NotExpansive";
    case ErrorKind::NotContractive: return "NotContractive";
    case ErrorKind::DidNotStabilize: return "DidNotStabilize";
    case ErrorKind::PartialMapsUnsupported: return "PartialMapsUnsupported";
    case ErrorKind::InvalidRadius: return "InvalidRadius";
    case ErrorKind::DegenerateScaleRange: return "DegenerateScaleRange";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace fastbasin
