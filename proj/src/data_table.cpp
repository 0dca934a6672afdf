// Copyright 2026 The heraldsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "heraldsim/data_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "heraldsim/error.hpp"

namespace heraldsim {

namespace {

std::optional<double> special_value(std::string_view s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::nullopt;
}

Cell parse_cell(std::string_view s) {
    std::int64_t i = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), i);
    if (!s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size()) return i;
    double d = 0.0;
    auto rd = std::from_chars(s.data(), s.data() + s.size(), d);
    if (!s.empty() && rd.ec == std::errc() && rd.ptr == s.data() + s.size() && std::isfinite(d)) {
        return d;
    }
    return std::string(s);
}

std::string cell_text(const Cell &c) {
    if (const auto *d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto *i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

void check_csv_safe(const std::string &s) {
    if (s.find_first_of(",\"\n\r") != std::string::npos) {
        throw ConfigError("CSV field may not contain commas, quotes or newlines: '" + s + "'");
    }
}

}  // namespace

void DataTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw ConfigError("row has " + std::to_string(row.size()) + " cells but table " + schema +
                          " has " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
}

std::optional<std::size_t> DataTable::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t DataTable::column(std::string_view name) const {
    if (auto i = find_column(name)) return *i;
    throw ConfigError("schema mismatch: dataset " + (schema.empty() ? std::string("(unnamed)") : schema) +
                      " has no column '" + std::string(name) + "'");
}

double DataTable::number(std::size_t row, std::size_t col) const {
    const Cell &c = rows.at(row).at(col);
    if (const auto *d = std::get_if<double>(&c)) return *d;
    if (const auto *i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    if (auto v = special_value(std::get<std::string>(c))) return *v;
    throw ConfigError("schema mismatch: column '" + columns[col] + "' holds text '" +
                      std::get<std::string>(c) + "' where a number is required");
}

std::string DataTable::text(std::size_t row, std::size_t col) const {
    return cell_text(rows.at(row).at(col));
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, r.ptr);
}

std::string to_csv(const DataTable &table) {
    std::string out = "# schema " + table.schema + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        check_csv_safe(table.columns[i]);
        out += (i ? "," : "") + table.columns[i];
    }
    out += "\n";
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::string s = cell_text(row[i]);
            check_csv_safe(s);
            if (i) out += ',';
            out += s;
        }
        out += "\n";
    }
    return out;
}

std::string to_json(const DataTable &table) {
    nlohmann::ordered_json doc;
    doc["schema"] = table.schema;
    doc["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto &row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell &c = row[i];
            if (const auto *d = std::get_if<double>(&c)) {
                obj[table.columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d)
                                                          : nlohmann::ordered_json(format_number(*d));
            } else if (const auto *n = std::get_if<std::int64_t>(&c)) {
                obj[table.columns[i]] = *n;
            } else {
                obj[table.columns[i]] = std::get<std::string>(c);
            }
        }
        rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(1) + "\n";
}

DataTable parse_csv(std::istream &in) {
    DataTable table;
    std::string line;
    bool header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view tag = "# schema ";
            if (table.schema.empty() && line.rfind(tag, 0) == 0) {
                table.schema = line.substr(tag.size());
                if (auto sp = table.schema.find(' '); sp != std::string::npos) table.schema.resize(sp);
            }
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        if (!header) {
            table.columns = std::move(fields);
            header = true;
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw IoError("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                          " fields, header has " + std::to_string(table.columns.size()));
        }
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (const auto &f : fields) row.push_back(parse_cell(f));
        table.rows.push_back(std::move(row));
    }
    if (!header) {
        throw IoError("CSV has no header row");
    }
    return table;
}

DataTable load_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return parse_csv(in);
}

}  // namespace heraldsim
