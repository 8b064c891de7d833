#include "spgarch/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "spgarch/csv.hpp"

namespace spgarch {

void save_field_csv(const SpatialField& field, const std::string& path, int rows, int cols) {
    const int n = field.size();
    CsvWriter out(path, {"id", "row", "col", "y", "h", "eps"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < n; ++i) {
        int r = cols > 0 ? i / cols + 1 : 0;
        int c = cols > 0 ? i % cols + 1 : 0;
        if (rows <= 0 || cols <= 0) r = c = 0;
        out.row({static_cast<double>(i + 1), static_cast<double>(r), static_cast<double>(c),
                 field.y[i], field.h ? (*field.h)[i] : nan,
                 field.eps ? (*field.eps)[i] : nan});
    }
}

SpatialField load_field_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    int y_col = table.column("y");
    int h_col = -1, eps_col = -1;
    if (std::find(table.header.begin(), table.header.end(), "h") != table.header.end())
        h_col = table.column("h");
    if (std::find(table.header.begin(), table.header.end(), "eps") != table.header.end())
        eps_col = table.column("eps");

    const int n = static_cast<int>(table.rows.size());
    if (n == 0) throw IoError("field CSV has no rows: " + path);
    SpatialField field;
    field.y.resize(n);
    Vector h(n), eps(n);
    bool h_ok = h_col >= 0, eps_ok = eps_col >= 0;
    for (int i = 0; i < n; ++i) {
        field.y[i] = table.rows[i][y_col];
        if (h_ok) {
            h[i] = table.rows[i][h_col];
            h_ok = std::isfinite(h[i]) && h[i] > 0.0;
        }
        if (eps_ok) {
            eps[i] = table.rows[i][eps_col];
            eps_ok = std::isfinite(eps[i]);
        }
    }
    if (h_ok) field.h = h;
    if (eps_ok) field.eps = eps;
    return field;
}

void save_pgm_heatmap(const Vector& values, int rows, int cols, const std::string& path) {
    if (rows * cols != values.size()) throw IoError("heatmap: grid does not match field size");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    double lo = values.minCoeff(), hi = values.maxCoeff();
    double range = hi > lo ? hi - lo : 1.0;
    out << "P5\n" << cols << " " << rows << "\n255\n";
    for (int i = 0; i < values.size(); ++i) {
        auto px = static_cast<unsigned char>(std::lround(255.0 * (values[i] - lo) / range));
        out.put(static_cast<char>(px));
    }
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["command_line"] = command_line;
    j["seed"] = seed;
    j["version"] = version;
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& [file, digest] : input_digests) digests[file] = digest;
    j["input_digests"] = digests;
    j["runtime_seconds"] = runtime_seconds;
    j["output_paths"] = output_paths;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace spgarch
