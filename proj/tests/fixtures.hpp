#pragma once

#include <string>

#include "forge/schema.hpp"

namespace fixtures {

// Single-table schema behind the height/MAX worked example.
inline forge::Schema student_schema() {
    forge::Schema s;
    s.schema_id = "student";
    forge::Table t;
    t.name = "student";
    t.columns.push_back({"name", forge::DataType::Text, {"amy", "bob", "carol"}});
    t.columns.push_back({"height", forge::DataType::Number, {"170", "180", "165"}});
    t.columns.push_back({"age", forge::DataType::Number, {"17", "18"}});
    t.columns.push_back({"class", forge::DataType::Text, {"alpha", "beta"}});
    s.tables.push_back(std::move(t));
    s.validate();
    return s;
}

// Two joinable tables (explicit foreign key) with text and number columns.
inline forge::Schema school_schema() {
    forge::Schema s;
    s.schema_id = "school";
    forge::Table student;
    student.name = "student";
    student.columns.push_back({"name", forge::DataType::Text, {"amy", "bob", "carol", "dan"}});
    student.columns.push_back({"height", forge::DataType::Number, {"170", "180", "165"}});
    student.columns.push_back({"class_id", forge::DataType::Number, {"1", "2"}});
    forge::Table klass;
    klass.name = "class";
    klass.columns.push_back({"class_id", forge::DataType::Number, {"1", "2"}});
    klass.columns.push_back({"teacher", forge::DataType::Text, {"smith", "jones"}});
    klass.columns.push_back({"size", forge::DataType::Number, {"20", "30"}});
    s.tables.push_back(std::move(student));
    s.tables.push_back(std::move(klass));
    s.foreign_keys.push_back({{0, 2}, {1, 0}});
    s.validate();
    return s;
}

}  // namespace fixtures
