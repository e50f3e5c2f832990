#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bnsl/dataset.hpp"
#include "bnsl/error.hpp"

namespace bnsl {

// Value and variable names are restricted to [A-Za-z0-9_-] so the CSV needs
// no quoting: comma separates, newline terminates, nothing is escaped.
inline bool valid_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail

// Loads a dataset whose header must name exactly the table's variables, in
// table order. Unknown values report their 1-based row and column.
inline Dataset load_csv(const std::string& path, const VariableTable& vars) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header))
    throw ParseError(path + ": missing header row");
  const auto names = detail::split_fields(header);
  if (static_cast<int>(names.size()) != vars.size())
    throw SchemaMismatchError(path + ": header has " +
                              std::to_string(names.size()) + " columns, table has " +
                              std::to_string(vars.size()));
  for (int v = 0; v < vars.size(); ++v)
    if (names[v] != vars.name(v))
      throw SchemaMismatchError(path + ": header column " +
                                std::to_string(v + 1) + " is '" + names[v] +
                                "', expected '" + vars.name(v) + "'");

  Dataset ds;
  ds.vars = vars;
  std::string line;
  std::int64_t row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;  // trailing newline
    ++row_no;
    const auto fields = detail::split_fields(line);
    if (static_cast<int>(fields.size()) != vars.size())
      throw MalformedRowError(path + ": row " + std::to_string(row_no) +
                              " has " + std::to_string(fields.size()) +
                              " fields, expected " +
                              std::to_string(vars.size()));
    for (int v = 0; v < vars.size(); ++v) {
      if (!valid_token(fields[v]))
        throw MalformedRowError(path + ": row " + std::to_string(row_no) +
                                ", column " + std::to_string(v + 1) +
                                ": invalid token");
      const int val = vars.value_index(v, fields[v]);
      if (val < 0)
        throw UnknownValueError(
            path + ": row " + std::to_string(row_no) + ", column " +
                std::to_string(v + 1) + ": unknown value '" + fields[v] +
                "' for variable " + vars.name(v),
            row_no, v + 1);
      ds.cells.push_back(static_cast<std::uint8_t>(val));
    }
  }
  ds.num_rows = row_no;
  return ds;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  for (int v = 0; v < ds.vars.size(); ++v) {
    if (!valid_token(ds.vars.name(v)))
      throw ValidationError("variable name not CSV-safe: " + ds.vars.name(v));
    for (int x = 0; x < ds.vars.cardinality(v); ++x)
      if (!valid_token(ds.vars.value_name(v, x)))
        throw ValidationError("value name not CSV-safe: " +
                              ds.vars.value_name(v, x));
  }
  std::ofstream out(path, std::ios::binary);  // binary: no CRLF translation
  if (!out) throw ParseError("cannot open " + path + " for writing");
  for (int v = 0; v < ds.vars.size(); ++v) {
    if (v) out << ',';
    out << ds.vars.name(v);
  }
  out << '\n';
  for (std::int64_t r = 0; r < ds.num_rows; ++r) {
    for (int v = 0; v < ds.vars.size(); ++v) {
      if (v) out << ',';
      out << ds.vars.value_name(v, ds.at(r, v));
    }
    out << '\n';
  }
  if (!out) throw ParseError("write failed: " + path);
}

}  // namespace bnsl
