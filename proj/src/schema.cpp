#include "forge/schema.hpp"

#include <fstream>
#include <set>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

std::string_view data_type_name(DataType t) {
    return t == DataType::Number ? "number" : "text";
}

DataType data_type_from_name(std::string_view name) {
    if (name == "text") return DataType::Text;
    if (name == "number") return DataType::Number;
    throw Error("unknown column type '" + std::string(name) + "' (expected \"text\" or \"number\")");
}

bool is_number_literal(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && s[i] == '-') ++i;
    std::size_t digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') { ++i; ++digits; }
    if (digits == 0) return false;
    if (i < s.size() && s[i] == '.') {
        ++i;
        std::size_t frac = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') { ++i; ++frac; }
        if (frac == 0) return false;
    }
    return i == s.size();
}

void Schema::validate() const {
    if (schema_id.empty()) throw Error("schema has empty schema_id");
    if (tables.empty()) throw Error("schema '" + schema_id + "' has no tables");
    std::set<std::string> table_names;
    for (const Table& t : tables) {
        if (t.name.empty()) throw Error("schema '" + schema_id + "' has a table with empty name");
        if (!table_names.insert(to_lower(t.name)).second)
            throw Error("schema '" + schema_id + "' has duplicate table name '" + t.name + "'");
        if (t.columns.empty())
            throw Error("table '" + t.name + "' in schema '" + schema_id + "' has no columns");
        std::set<std::string> col_names;
        for (const Column& c : t.columns) {
            if (c.name.empty())
                throw Error("table '" + t.name + "' in schema '" + schema_id + "' has a column with empty name");
            if (!col_names.insert(to_lower(c.name)).second)
                throw Error("table '" + t.name + "' in schema '" + schema_id +
                            "' has duplicate column name '" + c.name + "'");
            if (c.type == DataType::Number) {
                for (const std::string& v : c.values) {
                    if (!is_number_literal(v))
                        throw Error("number column '" + t.name + "." + c.name + "' in schema '" +
                                    schema_id + "' has non-numeric value '" + v + "'");
                }
            }
        }
    }
    for (const ForeignKey& fk : foreign_keys) {
        for (ColumnId id : {fk.from, fk.to}) {
            if (id.table >= tables.size() || id.column >= tables[id.table].columns.size())
                throw Error("schema '" + schema_id + "' has out-of-range foreign key [" +
                            std::to_string(id.table) + "," + std::to_string(id.column) + "]");
        }
    }
}

std::size_t Schema::column_count() const {
    std::size_t n = 0;
    for (const Table& t : tables) n += t.columns.size();
    return n;
}

std::size_t Schema::flat_index(ColumnId id) const {
    if (id.table >= tables.size() || id.column >= tables[id.table].columns.size())
        throw ContractViolation("flat_index: column id out of range");
    std::size_t n = 0;
    for (std::size_t t = 0; t < id.table; ++t) n += tables[t].columns.size();
    return n + id.column;
}

ColumnId Schema::from_flat(std::size_t flat) const {
    for (std::size_t t = 0; t < tables.size(); ++t) {
        if (flat < tables[t].columns.size()) return {t, flat};
        flat -= tables[t].columns.size();
    }
    throw ContractViolation("from_flat: index out of range");
}

std::string Schema::qualified_name(ColumnId id) const {
    return to_lower(table(id.table).name) + "." + to_lower(column(id).name);
}

bool Schema::find_table(std::string_view name, std::size_t* out) const {
    const std::string want = to_lower(name);
    for (std::size_t t = 0; t < tables.size(); ++t) {
        if (to_lower(tables[t].name) == want) {
            if (out) *out = t;
            return true;
        }
    }
    return false;
}

bool Schema::find_column(std::string_view table_name, std::string_view column_name,
                         ColumnId* out) const {
    std::size_t t = 0;
    if (!find_table(table_name, &t)) return false;
    const std::string want = to_lower(column_name);
    for (std::size_t c = 0; c < tables[t].columns.size(); ++c) {
        if (to_lower(tables[t].columns[c].name) == want) {
            if (out) *out = {t, c};
            return true;
        }
    }
    return false;
}

bool Schema::find_column_any_table(std::string_view column_name, ColumnId* out) const {
    const std::string want = to_lower(column_name);
    bool found = false;
    ColumnId hit;
    for (std::size_t t = 0; t < tables.size(); ++t) {
        for (std::size_t c = 0; c < tables[t].columns.size(); ++c) {
            if (to_lower(tables[t].columns[c].name) == want) {
                if (found) return false;  // ambiguous
                found = true;
                hit = {t, c};
            }
        }
    }
    if (found && out) *out = hit;
    return found;
}

bool Schema::is_foreign_key(ColumnId a, ColumnId b) const {
    for (const ForeignKey& fk : foreign_keys) {
        if ((fk.from == a && fk.to == b) || (fk.from == b && fk.to == a)) return true;
    }
    return false;
}

Schema Schema::from_json(const nlohmann::json& doc) {
    Schema s;
    try {
        s.schema_id = doc.at("schema_id").get<std::string>();
        for (const auto& jt : doc.at("tables")) {
            Table t;
            t.name = jt.at("name").get<std::string>();
            for (const auto& jc : jt.at("columns")) {
                Column c;
                c.name = jc.at("name").get<std::string>();
                c.type = data_type_from_name(jc.at("type").get<std::string>());
                if (jc.contains("values")) {
                    for (const auto& v : jc.at("values")) c.values.push_back(v.get<std::string>());
                }
                t.columns.push_back(std::move(c));
            }
            s.tables.push_back(std::move(t));
        }
        if (doc.contains("foreign_keys")) {
            for (const auto& jfk : doc.at("foreign_keys")) {
                if (!jfk.is_array() || jfk.size() != 2 || !jfk[0].is_array() || jfk[0].size() != 2 ||
                    !jfk[1].is_array() || jfk[1].size() != 2)
                    throw Error("foreign key entries must be [[ti,ci],[tj,cj]]");
                ForeignKey fk;
                fk.from = {jfk[0][0].get<std::size_t>(), jfk[0][1].get<std::size_t>()};
                fk.to = {jfk[1][0].get<std::size_t>(), jfk[1][1].get<std::size_t>()};
                s.foreign_keys.push_back(fk);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed schema document: ") + e.what());
    }
    s.validate();
    return s;
}

Schema Schema::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open schema file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("schema file '" + path + "': " + e.what());
    }
    try {
        return from_json(doc);
    } catch (const Error& e) {
        throw Error("schema file '" + path + "': " + e.what());
    }
}

nlohmann::ordered_json Schema::to_json() const {
    nlohmann::ordered_json doc;
    doc["schema_id"] = schema_id;
    doc["tables"] = nlohmann::ordered_json::array();
    for (const Table& t : tables) {
        nlohmann::ordered_json jt;
        jt["name"] = t.name;
        jt["columns"] = nlohmann::ordered_json::array();
        for (const Column& c : t.columns) {
            nlohmann::ordered_json jc;
            jc["name"] = c.name;
            jc["type"] = std::string(data_type_name(c.type));
            jc["values"] = c.values;
            jt["columns"].push_back(std::move(jc));
        }
        doc["tables"].push_back(std::move(jt));
    }
    doc["foreign_keys"] = nlohmann::ordered_json::array();
    for (const ForeignKey& fk : foreign_keys) {
        doc["foreign_keys"].push_back({{fk.from.table, fk.from.column}, {fk.to.table, fk.to.column}});
    }
    return doc;
}

}  // namespace forge
