#include "dipsmc/textio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dipsmc/errors.hpp"

namespace dipsmc::textio {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("read failure: " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw DataError("write failure: " + path);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& token, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    while (pos < token.size() && (token[pos] == ' ' || token[pos] == '\t')) ++pos;
    if (pos != token.size()) throw DataError("");
    if (!std::isfinite(v)) throw DataError("");
    return v;
  } catch (...) {
    throw DataError("not a finite number at " + where + ": '" + token + "'");
  }
}

}  // namespace dipsmc::textio
