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

// Column-oriented result tables and their CSV / JSON encodings.
//
// CSV: "# schema <name>/<version>" comment line, a header row, then data rows.
// JSON: {"schema": ..., "columns": [...], "rows": [{column: value, ...}, ...]}.
// Non-finite numbers are written as the strings "inf", "-inf" and "nan" in both.

#ifndef HERALDSIM_DATA_TABLE_HPP
#define HERALDSIM_DATA_TABLE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace heraldsim {

using Cell = std::variant<double, std::int64_t, std::string>;

struct DataTable {
    std::string schema;  // e.g. "heraldsim.fig4_surface/1"
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    DataTable() = default;
    DataTable(std::string schema_name, std::vector<std::string> column_names)
        : schema(std::move(schema_name)), columns(std::move(column_names)) {}

    /// Throws ConfigError when the row width differs from the header.
    void add_row(std::vector<Cell> row);
    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }

    std::optional<std::size_t> find_column(std::string_view name) const;
    /// Throws ConfigError("schema mismatch ...") when absent.
    std::size_t column(std::string_view name) const;

    /// Numeric view of a cell; "inf"/"-inf"/"nan" strings map to the IEEE values.
    double number(std::size_t row, std::size_t col) const;
    std::string text(std::size_t row, std::size_t col) const;
};

/// Shortest round-trip decimal form; non-finite values spelled as above.
std::string format_number(double value);

std::string to_csv(const DataTable &table);
std::string to_json(const DataTable &table);

/// Cells parse as integers, then doubles, else stay text. Throws IoError.
DataTable parse_csv(std::istream &in);
DataTable load_csv(const std::filesystem::path &path);

}  // namespace heraldsim

#endif  // HERALDSIM_DATA_TABLE_HPP
