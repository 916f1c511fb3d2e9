#pragma once

// Minimal CSV handling for the machine-generated numeric tables this project
// reads and writes: comma-separated, no quoting, CR-tolerant.

#include <string>
#include <vector>

namespace pcombine::csv {

std::vector<std::string> split_line(const std::string& line);

// Whole file as rows of fields, header included; blank lines skipped.
std::vector<std::vector<std::string>> read_table(const std::string& path);

// Strict numeric parses; `context` names the file/field for the error text.
double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

struct PMatrix {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;  // one length-K p-vector per id
};

// Wide p-value matrix: header `id,p1,...,pK`, one row per case.
PMatrix read_pmatrix(const std::string& path);

}  // namespace pcombine::csv
