#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace geohealth::cli {

/// Exit codes: 0 success, 2 input error, 3 numeric failure, 4 config error,
/// 1 anything unexpected.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geohealth::cli
