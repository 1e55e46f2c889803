#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace forge {

enum class DataType { Text, Number };

std::string_view data_type_name(DataType t);
DataType data_type_from_name(std::string_view name);

// True when the string looks like an integer or decimal literal
// (optional leading '-', digits, optional fractional part).
bool is_number_literal(std::string_view s);

struct Column {
    std::string name;
    DataType type = DataType::Text;
    std::vector<std::string> values;  // sample cell values, may be empty

    bool operator==(const Column&) const = default;
};

struct Table {
    std::string name;
    std::vector<Column> columns;

    bool operator==(const Table&) const = default;
};

// Position of a column inside a schema: table index + column index.
struct ColumnId {
    std::size_t table = 0;
    std::size_t column = 0;

    bool operator==(const ColumnId&) const = default;
    auto operator<=>(const ColumnId&) const = default;
};

struct ForeignKey {
    ColumnId from;
    ColumnId to;

    bool operator==(const ForeignKey&) const = default;
};

class Schema {
public:
    std::string schema_id;
    std::vector<Table> tables;
    std::vector<ForeignKey> foreign_keys;

    // Throws Error on structural problems: empty id, no tables, a table
    // with no columns, duplicate table names (case-insensitive), duplicate
    // column names within one table, out-of-range foreign keys, or a value
    // list on a number column containing non-numeric text.
    void validate() const;

    std::size_t column_count() const;

    // Columns are enumerated table-major: all of table 0, then table 1, ...
    std::size_t flat_index(ColumnId id) const;
    ColumnId from_flat(std::size_t flat) const;

    const Table& table(std::size_t t) const { return tables.at(t); }
    const Column& column(ColumnId id) const { return tables.at(id.table).columns.at(id.column); }

    // "table.column", lowercased.
    std::string qualified_name(ColumnId id) const;

    // Case-insensitive lookups; return false / leave out untouched on miss.
    bool find_table(std::string_view name, std::size_t* out) const;
    bool find_column(std::string_view table_name, std::string_view column_name, ColumnId* out) const;
    // Search all tables for a column name; fails when ambiguous.
    bool find_column_any_table(std::string_view column_name, ColumnId* out) const;

    bool is_foreign_key(ColumnId a, ColumnId b) const;

    static Schema from_json(const nlohmann::json& doc);
    static Schema from_file(const std::string& path);
    nlohmann::ordered_json to_json() const;

    bool operator==(const Schema&) const = default;
};

}  // namespace forge
