#include "zrl/table_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace zrl {

void ResultTable::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("ResultTable: row width mismatch");
    rows.push_back(std::move(row));
}

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string to_csv(const ResultTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const ResultTable& table) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json rec = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) rec[table.columns[i]] = row[i];
        arr.push_back(rec);
    }
    return arr.dump(2) + "\n";
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write to " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void emit_table(const ResultTable& table, TableFormat format, const std::string& path) {
    const std::string content =
        format == TableFormat::csv ? to_csv(table) : to_json(table);
    write_atomic(path, content);
}

}  // namespace zrl
