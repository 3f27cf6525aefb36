#include "archimax/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "archimax/errors.hpp"

namespace archimax {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw_invalid("not a number: '" + s + "'");
    return v;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (!have_header) {
            table.columns = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != table.columns.size())
            throw_invalid("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(table.columns.size()) + " fields");
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c));
        rows.push_back(std::move(row));
    }
    if (!have_header) throw_invalid("CSV input has no header row");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) table.values(i, j) = rows[i][j];
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_invalid("cannot open '" + path + "'");
    return read_csv(in);
}

void write_csv(std::ostream& out, const CsvTable& table, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    for (std::size_t j = 0; j < table.columns.size(); ++j) out << (j ? "," : "") << table.columns[j];
    out << '\n';
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.values.cols(); ++j)
            out << (j ? "," : "") << format_double(table.values(i, j));
        out << '\n';
    }
}

std::vector<std::string> default_column_names(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

}  // namespace archimax
