#ifndef CONTOUR_SEEKER_CSV_HPP
#define CONTOUR_SEEKER_CSV_HPP

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "contour_seeker/errors.hpp"

namespace contour_seeker::csv {

inline constexpr const char* kSchemaLine = "# schema=1";

/// Shortest representation that reads back to the same double.
inline std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& cell, std::size_t line) {
    double v = 0.0;
    const char* first = cell.data();
    if (!cell.empty() && cell[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw IngestError("line " + std::to_string(line) + ": cannot parse '" + cell + "' as a number", line);
    }
    return v;
}

inline int parse_int(const std::string& cell, std::size_t line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        // Accept integral values written as reals, e.g. "2.0".
        const double d = parse_double(cell, line);
        if (d != static_cast<double>(static_cast<int>(d))) {
            throw IngestError("line " + std::to_string(line) + ": '" + cell + "' is not an integer level", line);
        }
        return static_cast<int>(d);
    }
    return v;
}

/// Header-addressed table. Lines starting with '#' and blank lines are skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw IngestError("missing column '" + name + "'", 1);
    }

    bool has_column(const std::string& name) const {
        for (const auto& h : header) {
            if (h == name) return true;
        }
        return false;
    }
};

inline Table read(std::istream& in) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto cells = split(s);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw IngestError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                                  " fields, found " + std::to_string(cells.size()),
                              lineno);
        }
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(lineno);
    }
    if (!have_header) throw IngestError("file has no header row", 0);
    return t;
}

/// Writes one comma-separated row.
inline void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

}  // namespace contour_seeker::csv

#endif  // CONTOUR_SEEKER_CSV_HPP
