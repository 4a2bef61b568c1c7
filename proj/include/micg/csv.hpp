#pragma once

#include "micg/error.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace micg {

/// Comma-separated table with a header row. Leading lines starting with '#' are kept as comments.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position, or -1 when absent.
    int column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return static_cast<int>(i);
            }
        }
        return -1;
    }

    std::size_t require_column(std::string_view name) const {
        const int c = column(name);
        if (c < 0) {
            throw ValidationError("required column '" + std::string(name) + "' is missing");
        }
        return static_cast<std::size_t>(c);
    }
};

inline CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::size_t pos = 0;
    std::size_t line = 1;

    while (pos < text.size() && text[pos] == '#') {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view c = text.substr(pos, eol - pos);
        if (!c.empty() && c.back() == '\r') {
            c.remove_suffix(1);
        }
        table.comments.emplace_back(c);
        pos = eol + 1;
        ++line;
    }

    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_quoted = false;
    bool have_content = false;
    std::size_t record_line = line;

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        if (table.header.empty()) {
            table.header = std::move(record);
        } else {
            if (record.size() != table.header.size()) {
                throw ValidationError("CSV line " + std::to_string(record_line) + " has " +
                                      std::to_string(record.size()) + " fields, header has " +
                                      std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(record));
        }
        record.clear();
        have_content = false;
    };

    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty() || field_quoted) {
                throw ValidationError("CSV line " + std::to_string(line) + ": stray quote");
            }
            in_quotes = true;
            field_quoted = true;
            have_content = true;
            break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            field_quoted = false;
            have_content = true;
            break;
        case '\r':
            break;
        case '\n':
            if (have_content || !field.empty()) {
                end_record();
            }
            ++line;
            record_line = line;
            break;
        default:
            field.push_back(c);
            have_content = true;
        }
    }
    if (in_quotes) {
        throw ValidationError("CSV ends inside a quoted field");
    }
    if (have_content || !field.empty()) {
        end_record();
    }
    if (table.header.empty()) {
        throw ValidationError("CSV has no header row");
    }
    return table;
}

inline std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// Shortest round-trip decimal form; "NA" for non-finite values.
inline std::string format_number(double v) {
    if (!std::isfinite(v)) {
        return "NA";
    }
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Parse a complete numeric token; nullopt when the text is not a finite number.
inline std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && s.front() == ' ') {
        s.remove_prefix(1);
    }
    while (!s.empty() && s.back() == ' ') {
        s.remove_suffix(1);
    }
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

} // namespace micg
