#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace linecospar {

// %.17g: enough digits to round-trip any double.
std::string format_double(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column position by name, or -1.
    int column(std::string_view name) const;
};

std::vector<std::string> split_csv_line(std::string_view line);

// Reads a comma-separated file with a header line. Blank lines and lines
// starting with '#' are skipped.
CsvTable read_csv(const std::filesystem::path & path);

double parse_double(const std::string & field);

}  // namespace linecospar
