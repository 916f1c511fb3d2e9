#include "pcombine/csv.hpp"

#include <cstdlib>
#include <fstream>

#include "pcombine/types.hpp"

namespace pcombine::csv {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_line(line));
  }
  if (rows.empty()) throw DataError(path + " is empty");
  return rows;
}

double parse_double(const std::string& field, const std::string& context) {
  const char* s = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw DataError("bad number '" + field + "' in " + context);
  return v;
}

long long parse_int(const std::string& field, const std::string& context) {
  const char* s = field.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0')
    throw DataError("bad integer '" + field + "' in " + context);
  return v;
}

PMatrix read_pmatrix(const std::string& path) {
  const auto rows = read_table(path);
  const auto& header = rows[0];
  if (header.size() < 2 || header[0] != "id")
    throw DataError(path + ": expected header id,p1,...,pK");
  const size_t K = header.size() - 1;
  if (rows.size() < 2) throw DataError(path + ": no data rows");
  PMatrix out;
  out.ids.reserve(rows.size() - 1);
  out.rows.reserve(rows.size() - 1);
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw DataError(path + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(rows[r].size()) + " fields, expected " +
                      std::to_string(header.size()));
    out.ids.push_back(rows[r][0]);
    std::vector<double> p(K);
    for (size_t c = 0; c < K; ++c)
      p[c] = parse_double(rows[r][c + 1],
                          path + " row " + std::to_string(r + 1));
    out.rows.push_back(std::move(p));
  }
  return out;
}

}  // namespace pcombine::csv
