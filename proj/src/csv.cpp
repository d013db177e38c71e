#include "netslice/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace netslice {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_int(long long v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
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

double parse_double(const std::string& token) {
  if (token.empty()) throw std::runtime_error("empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size())
    throw std::runtime_error("malformed number '" + token + "'");
  return v;
}

long long parse_int(const std::string& token) {
  if (token.empty()) throw std::runtime_error("empty numeric field");
  char* end = nullptr;
  const long long v = std::strtoll(token.c_str(), &end, 10);
  if (end != token.c_str() + token.size())
    throw std::runtime_error("malformed integer '" + token + "'");
  return v;
}

}  // namespace netslice
