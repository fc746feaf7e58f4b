#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nanoreg/dataset.hpp"

namespace nanoreg {

/// File could not be opened or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed CSV content: missing column, unparseable or non-finite cell.
/// Messages name the offending data row (1-based) and column.
struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raw comma-separated table: one header row plus string cells.
/// UTF-8, '.' decimal separator, no quoting or thousands separators.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;  // throws CsvError if absent
};

CsvTable read_csv_table(const std::string& path);
void write_csv_table(const std::string& path, const CsvTable& table);

/// Doubles are written with 17 significant digits so values round-trip
/// exactly through text.
std::string format_double(double value);
std::string format_double10(double value);

/// Parses a cell as a finite double; row is the 1-based data row used in
/// error messages.
double parse_double_cell(const std::string& cell, std::size_t row, const std::string& column);

Dataset load_csv(const std::string& path, const std::vector<std::string>& feature_columns,
                 const std::string& target_column);

/// Writes features then target, one header row, row order preserved.
void write_csv(const Dataset& data, const std::string& path);

}  // namespace nanoreg
