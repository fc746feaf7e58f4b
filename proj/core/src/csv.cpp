#include "nanoreg/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nanoreg {

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw CsvError("missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.eof()) break;
        if (first) {
            table.header = split_line(line);
            first = false;
        } else {
            std::vector<std::string> cells = split_line(line);
            if (cells.size() != table.header.size()) {
                throw CsvError("row " + std::to_string(table.rows.size() + 1) + ": has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(cells));
        }
    }
    if (first) throw CsvError("empty file: " + path);
    return table;
}

void write_csv_table(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string format_double10(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

double parse_double_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) {
        throw CsvError("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" +
                       cell + "' as a number");
    }
    if (!std::isfinite(v)) {
        throw CsvError("row " + std::to_string(row) + ", column '" + column + "': value '" + cell +
                       "' is not finite");
    }
    return v;
}

Dataset load_csv(const std::string& path, const std::vector<std::string>& feature_columns,
                 const std::string& target_column) {
    const CsvTable table = read_csv_table(path);

    std::vector<std::size_t> feature_idx;
    feature_idx.reserve(feature_columns.size());
    for (const auto& name : feature_columns) feature_idx.push_back(table.column_index(name));
    const std::size_t target_idx = table.column_index(target_column);

    Dataset data;
    data.feature_names = feature_columns;
    data.target_name = target_column;
    data.samples.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        Sample s;
        s.features.reserve(feature_columns.size());
        for (std::size_t c = 0; c < feature_idx.size(); ++c) {
            if (feature_idx[c] >= row.size()) {
                throw CsvError("row " + std::to_string(r + 1) + ", column '" + feature_columns[c] +
                               "': missing cell");
            }
            s.features.push_back(parse_double_cell(row[feature_idx[c]], r + 1, feature_columns[c]));
        }
        if (target_idx >= row.size()) {
            throw CsvError("row " + std::to_string(r + 1) + ", column '" + target_column +
                           "': missing cell");
        }
        s.target = parse_double_cell(row[target_idx], r + 1, target_column);
        s.origin = Origin::original;
        data.samples.push_back(std::move(s));
    }
    data.check_valid();
    return data;
}

void write_csv(const Dataset& data, const std::string& path) {
    CsvTable table;
    table.header = data.feature_names;
    table.header.push_back(data.target_name);
    table.rows.reserve(data.size());
    for (const Sample& s : data.samples) {
        std::vector<std::string> row;
        row.reserve(s.features.size() + 1);
        for (double v : s.features) row.push_back(format_double(v));
        row.push_back(format_double(s.target));
        table.rows.push_back(std::move(row));
    }
    write_csv_table(path, table);
}

}  // namespace nanoreg
