#pragma once

#include <stdexcept>
#include <string>

namespace fastbasin {

enum class ErrorKind {
  Syntax,
  SingularMap,
  MixedSpaces,
  OutsideImage,
  OutsideDomain,
  IndexOutOfRange,
  NotExpansive,
  NotContractive,
  DidNotStabilize,
  PartialMapsUnsupported,
  InvalidRadius,
  DegenerateScaleRange,
  NotFound,
  Unsupported,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fastbasin
