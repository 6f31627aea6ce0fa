#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace clockshift::cli {

inline constexpr const char* kToolVersion = "clockshift 1.0.0";

/// Tabular command output: '#' comment lines, a header row, typed cells.
struct Table {
  using Cell = std::variant<double, std::string>;
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Comma-separated with shortest round-trip numbers.
std::string render_csv(const Table& table);
/// Aligned columns, numbers to 4 significant digits.
std::string render_table(const Table& table);

/// FNV-1a 64-bit hash of the file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

/// Runs one command line. Normal output goes to `out` (or --out), errors to
/// `err` as a single "error[<code>] <kind>: <message>" line. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clockshift::cli
