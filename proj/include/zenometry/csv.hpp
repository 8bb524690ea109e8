#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "zenometry/errors.hpp"

namespace zenometry::csv {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const auto *end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end || field.empty())
        throw ParseError("expected a number, got '" + std::string(field) + "'", line_no);
    return value;
}

/// Numeric table with a fixed header. Blank lines and lines starting with '#' are skipped.
/// Every data row must carry exactly as many fields as the header.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> line_numbers;
};

inline Table read_table(std::istream &in, const std::vector<std::string> &expected_header) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto fields = split(body);
        if (!have_header) {
            for (const auto &f : fields) table.header.emplace_back(f);
            if (table.header != expected_header) {
                std::string want;
                for (const auto &h : expected_header) want += (want.empty() ? "" : ",") + h;
                throw ParseError("unexpected header, want '" + want + "'", line_no);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != expected_header.size())
            throw ParseError("expected " + std::to_string(expected_header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto &f : fields) row.push_back(parse_double(f, line_no));
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) throw ParseError("missing header");
    return table;
}

inline Table read_table_file(const std::string &path, const std::vector<std::string> &expected_header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return read_table(in, expected_header);
    } catch (const ParseError &e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Round-trippable text for a double.
inline std::string format(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

} // namespace zenometry::csv
