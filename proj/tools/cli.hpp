#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fastbasin::cli {

/// args excludes the program name. Returns 0 on success, 2 on configuration
/// or usage errors, 1 when a computation fails.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fastbasin::cli
