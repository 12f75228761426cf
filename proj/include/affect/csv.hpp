#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affect::csv {

/// A comma-separated table: header row plus string cells, loaded eagerly.
/// Lines starting with '#' before the header are kept as comments.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> find(std::string_view column) const;
};

Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

/// Strict decimal parse; nullopt on blank or trailing garbage.
/// "nan"/"inf" spellings are accepted and yield non-finite values.
std::optional<double> parse_double(std::string_view cell);

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

}  // namespace affect::csv
