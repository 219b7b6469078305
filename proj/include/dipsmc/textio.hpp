#pragma once

#include <string>
#include <vector>

namespace dipsmc::textio {

/// Shortest representation that round-trips a double ("%.17g").
std::string fmt_g17(double v);

/// Whole file as a string; throws DataError if unreadable.
std::string read_file(const std::string& path);

/// Writes content atomically enough for our purposes; throws DataError on failure.
void write_file(const std::string& path, const std::string& content);

/// Splits one CSV line on commas; no quoting support (none of our files need it).
std::vector<std::string> split_csv(const std::string& line);

/// Parses a double; throws DataError naming `where` when the token is not a
/// finite number.
double parse_double(const std::string& token, const std::string& where);

}  // namespace dipsmc::textio
