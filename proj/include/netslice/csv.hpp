#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Minimal CSV plumbing shared by the dataset, simulator export and metrics
// writers. Numbers are printed with %.17g so files round-trip doubles
// losslessly and byte-identically across runs.

namespace netslice {

std::string format_double(double v);
std::string format_int(long long v);

// Splits one line on commas. No quoting: all schemas here are numeric or
// simple tags.
std::vector<std::string> split_csv_line(const std::string& line);

// strtod with full-string validation; throws std::runtime_error naming the
// offending token.
double parse_double(const std::string& token);
long long parse_int(const std::string& token);

}  // namespace netslice
