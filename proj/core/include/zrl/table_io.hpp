#pragma once

#include <string>
#include <vector>

namespace zrl {

/// A rectangular result table: named columns, string cells. Numeric cells
/// are pre-formatted with format_number so emission is byte-stable.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
};

/// 17 significant digits, '.' decimal separator, locale-independent.
std::string format_number(double x);

std::string to_csv(const ResultTable& table);
std::string to_json(const ResultTable& table);

/// Writes to a temp file and renames into place; no partial output files.
void write_atomic(const std::string& path, const std::string& content);

enum class TableFormat { csv, json };

void emit_table(const ResultTable& table, TableFormat format, const std::string& path);

}  // namespace zrl
