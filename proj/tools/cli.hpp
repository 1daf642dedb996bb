#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace superrad::cli {

/// Runs the command line `args` (without the program name). Returns 0 on success, 2 on
/// usage errors and 1 when a numerical consistency check fails.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses an angle in radians; a trailing "pi" multiplies by pi ("0.4pi", "pi", "-pi").
double parse_angle(const std::string& text);

}  // namespace superrad::cli
