#pragma once

// Text table files:
//
//   harsanyi-table v1 kind=value n=3 sample=0
//   000 0.25
//   100 1
//   ...
//
// One row per mask (bitstring, character j = variable j), written in
// ascending mask order with shortest round-trip decimals. Rows may appear in
// any order on load; blank lines and lines starting with '#' are skipped.

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "harsanyi/error.hpp"
#include "harsanyi/lattice.hpp"

namespace harsanyi {

enum class TableKind { kValue, kInteraction };

inline std::string_view kind_name(TableKind k) {
  return k == TableKind::kValue ? "value" : "interaction";
}

// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct TableFile {
  TableKind kind = TableKind::kValue;
  int n = 0;
  std::string sample = "0";
  std::vector<double> values;  // indexed by mask
};

inline void write_table(std::ostream& os, const TableFile& t) {
  check_variable_count(t.n);
  if (t.values.size() != table_size(t.n)) throw DimensionError("table has wrong size");
  if (t.sample.empty() || t.sample.find_first_of(" \t\r\n") != std::string::npos) {
    throw FormatError("sample id must be a nonempty token without whitespace");
  }
  os << "harsanyi-table v1 kind=" << kind_name(t.kind) << " n=" << t.n
     << " sample=" << t.sample << '\n';
  for (Mask m = 0; m < t.values.size(); ++m) {
    os << to_bitstring(m, t.n) << ' ' << format_double(t.values[m]) << '\n';
  }
}

inline TableFile read_table(std::istream& is) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      return true;
    }
    return false;
  };

  if (!next_line()) throw FormatError("empty table file");
  TableFile t;
  {
    std::istringstream header(line);
    std::string magic, version, field;
    header >> magic >> version;
    if (magic != "harsanyi-table" || version != "v1") {
      throw FormatError("bad header: '" + line + "'");
    }
    bool have_kind = false, have_n = false;
    while (header >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw FormatError("bad header field '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "kind") {
        if (value == "value") {
          t.kind = TableKind::kValue;
        } else if (value == "interaction") {
          t.kind = TableKind::kInteraction;
        } else {
          throw FormatError("unknown table kind '" + value + "'");
        }
        have_kind = true;
      } else if (key == "n") {
        const auto res = std::from_chars(value.data(), value.data() + value.size(), t.n);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
          throw FormatError("bad n '" + value + "'");
        }
        have_n = true;
      } else if (key == "sample") {
        t.sample = value;
      } else {
        throw FormatError("unknown header field '" + key + "'");
      }
    }
    if (!have_kind || !have_n) throw FormatError("header needs kind= and n=");
  }
  try {
    check_variable_count(t.n);
  } catch (const DimensionError& e) {
    throw FormatError(e.what());
  }

  const std::size_t size = table_size(t.n);
  t.values.assign(size, 0.0);
  std::vector<char> seen(size, 0);
  std::size_t rows = 0;
  while (next_line()) {
    ++rows;
    std::istringstream row(line);
    std::string bits, number, extra;
    if (!(row >> bits >> number) || (row >> extra)) {
      throw FormatError("row " + std::to_string(rows) + ": expected '<mask> <value>'");
    }
    if (bits.size() != static_cast<std::size_t>(t.n) ||
        bits.find_first_not_of("01") != std::string::npos) {
      throw FormatError("row " + std::to_string(rows) + ": bad mask '" + bits + "'");
    }
    const Mask m = VariableSet::from_bitstring(bits).mask();
    if (seen[m]) throw FormatError("duplicate mask " + bits);
    seen[m] = 1;
    if (!parse_double(number, t.values[m]) || !std::isfinite(t.values[m])) {
      throw FormatError("row " + std::to_string(rows) + ": bad value '" + number + "'");
    }
  }
  if (rows != size) {
    std::string missing;
    int listed = 0;
    for (Mask m = 0; m < size; ++m) {
      if (seen[m]) continue;
      if (listed == 16) {
        missing += " ...";
        break;
      }
      missing += " " + to_bitstring(m, t.n);
      ++listed;
    }
    throw FormatError("expected " + std::to_string(size) + " rows, got " +
                      std::to_string(rows) + "; missing:" + missing);
  }
  return t;
}

inline TableFile read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_table(in);
}

inline void write_table_file(const std::string& path, const TableFile& t) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  write_table(out, t);
  if (!out.flush()) throw FormatError("write failed for " + path);
}

inline void save_value_table(const std::string& path, const ValueTable& table,
                             const std::string& sample = "0") {
  write_table_file(path, {TableKind::kValue, table.n(), sample,
                          {table.entries().begin(), table.entries().end()}});
}

inline void save_interaction_table(const std::string& path, const InteractionTable& table,
                                   const std::string& sample = "0") {
  write_table_file(path, {TableKind::kInteraction, table.n(), sample,
                          {table.entries().begin(), table.entries().end()}});
}

inline ValueTable load_value_table(const std::string& path) {
  auto t = read_table_file(path);
  if (t.kind != TableKind::kValue) throw FormatError(path + " holds an interaction table");
  return ValueTable(t.n, std::move(t.values));
}

inline InteractionTable load_interaction_table(const std::string& path) {
  auto t = read_table_file(path);
  if (t.kind != TableKind::kInteraction) throw FormatError(path + " holds a value table");
  return InteractionTable(t.n, std::move(t.values));
}

}  // namespace harsanyi
