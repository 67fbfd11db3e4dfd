#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tirefit::cli {

/**
 * Entry point shared by the executable and the tests. args excludes the
 * program name. Returns the process exit code: 0 ok, 2 input or schema
 * error, 3 insufficient data, 4 optimization failure. Failures are reported
 * as one JSON object on err.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tirefit::cli
