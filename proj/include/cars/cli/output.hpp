#pragma once

// Tabular output: RFC-4180 CSV with leading '#' metadata lines, or JSON.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cars/cli/config.hpp"

namespace cars::cli {

/// Raised when a computed column is not finite.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    Metadata meta;

    void check_finite() const {
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                if (!std::isfinite(rows[r][c]))
                    throw NumericError("non-finite value in column '" + columns[c] + "', row " + std::to_string(r));
    }
};

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string to_csv(const Table& t) {
    t.check_finite();
    std::string out;
    for (const auto& [k, v] : t.meta) out += "# " + k + ": " + v + "\r\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + csv_field(t.columns[c]);
    out += "\r\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_number(row[c]);
        out += "\r\n";
    }
    return out;
}

inline nlohmann::ordered_json meta_json(const Metadata& meta) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta) m[k] = v;
    return m;
}

inline std::string to_json(const Table& t) {
    t.check_finite();
    nlohmann::ordered_json j;
    j["meta"] = meta_json(t.meta);
    j["columns"] = t.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r;
        for (std::size_t c = 0; c < row.size(); ++c) r[t.columns[c]] = row[c];
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

inline std::string render(const Table& t, Format f) { return f == Format::csv ? to_csv(t) : to_json(t); }

/// Writes to `path`, or stdout when empty. An unwritable path is a configuration error.
inline void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw ConfigError("failed writing output file '" + path + "'");
}

}  // namespace cars::cli
