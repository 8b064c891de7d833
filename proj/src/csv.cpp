#include "spgarch/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace spgarch {

int CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IoError("CSV: missing column '" + name + "'");
    return static_cast<int>(it - header.begin());
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

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size())
            throw IoError("CSV: ragged row in " + path);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw IoError("CSV: non-numeric cell '" + c + "' in " + path);
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path) {
    if (!out_) throw IoError("cannot write " + path);
    raw_row(header);
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    raw_row(cells);
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << "\r\n";
}

}  // namespace spgarch
