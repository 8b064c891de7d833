#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "spgarch/errors.hpp"

namespace spgarch {

/// Numeric CSV table: one header row, all data cells parsed as doubles.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

/// Formats a double with 17 significant digits and '.' decimal separator.
std::string format_double(double v);

/// RFC-4180-style writer for numeric tables.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void raw_row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
};

}  // namespace spgarch
