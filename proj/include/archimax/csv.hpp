#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "archimax/matrix.hpp"

namespace archimax {

struct CsvTable {
    std::vector<std::string> columns;
    Matrix values;
};

/// Reads a header row followed by numeric rows. Lines starting with '#'
/// are comments and skipped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Writes optional '#' comment lines, the header row and the rows.
void write_csv(std::ostream& out, const CsvTable& table, const std::vector<std::string>& comments = {});

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

std::vector<std::string> default_column_names(std::size_t d);

}  // namespace archimax
