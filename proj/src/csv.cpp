#include "affect/csv.hpp"

#include "affect/error.hpp"

#include <charconv>
#include <fstream>

namespace affect::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<std::size_t> Table::find(std::string_view column) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == column) return i;
    }
    return std::nullopt;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto end = comma == std::string_view::npos ? line.size() : comma;
        cells.emplace_back(trim(line.substr(start, end - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::FileNotFound, path.string());

    Table table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (line.empty()) continue;
            if (line.front() == '#') {
                table.comments.push_back(line);
                continue;
            }
            // UTF-8 byte order mark
            if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
            table.header = split_line(line);
            have_header = true;
            continue;
        }
        if (trim(line).empty()) continue;
        table.rows.push_back(split_line(line));
    }
    if (!have_header) fail(Errc::EmptyFile, path.string());
    return table;
}

std::optional<double> parse_double(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
    return value;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace affect::csv
