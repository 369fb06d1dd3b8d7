#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gridflux/feeder.hpp"

namespace gridflux {

/// Malformed text: bad JSON syntax, ragged CSV, non-numeric cells.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed text with wrong structure; `path` is a JSON pointer such as /segments/3/to.
class SemanticError : public Error {
  public:
    SemanticError(std::string path, const std::string& what) : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

/// Parses a feeder document without validating topology.
FeederSpec parse_feeder_spec(std::string_view document);
/// Parses and validates; throws ParseError, SemanticError or ValidationError.
Feeder parse_feeder(std::string_view document);
Feeder load_feeder(const std::filesystem::path& path);
std::string write_feeder(const FeederSpec& spec);

std::string read_text_file(const std::filesystem::path& path);

struct ProfileTable {
    std::vector<double> t_min;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // columns[k][row]

    std::size_t size() const noexcept { return t_min.size(); }
    double step() const noexcept { return t_min.size() > 1 ? t_min[1] - t_min[0] : 0.0; }
    bool contains(std::string_view name) const;
    const std::vector<double>& series(std::string_view name) const;  // throws Error if absent
};

/// CSV with header `t_min,<series>...`; `#` lines are comments.
ProfileTable parse_profiles(std::string_view csv);
void write_profiles(const ProfileTable& table, std::ostream& out);

/// Fixed-point text with six decimals, independent of the global locale.
std::string format_fixed6(double value);

}  // namespace gridflux
