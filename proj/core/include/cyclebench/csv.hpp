#pragma once
// Minimal CSV handling for the interchange files: comma-delimited, '.'
// decimal point, UTF-8 passed through untouched, no quoting (the formats
// this project defines are plain numeric tables).

#include <istream>
#include <string>
#include <vector>

namespace cyclebench::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based file line number per row, for error reporting.
    std::vector<int> line_numbers;
};

std::vector<std::string> split_line(const std::string& line);

Table read(std::istream& in);
// Throws std::runtime_error if the file cannot be opened.
Table read_file(const std::string& path);

// Column position by exact header name; -1 when absent.
int column_index(const Table& t, const std::string& name);

// Locale-independent parse; context goes into the exception message.
double to_double(const std::string& field, const std::string& context);

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

}  // namespace cyclebench::csv
