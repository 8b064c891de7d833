#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spgarch/models.hpp"

namespace spgarch {

/// Field CSV: columns id,row,col,y,h,eps (row/col are 1-based lattice
/// coordinates, 0 when the field has no lattice layout; h and eps are NaN
/// when unknown).
void save_field_csv(const SpatialField& field, const std::string& path, int rows, int cols);

/// Reads the `y` column (plus h and eps when finite) from a field CSV or
/// any CSV with an `y` column.
SpatialField load_field_csv(const std::string& path);

/// Grayscale PGM heatmap of a lattice field, min-max scaled.
void save_pgm_heatmap(const Vector& values, int rows, int cols, const std::string& path);

/// Reproducibility manifest written next to each CLI output.
struct RunManifest {
    std::string command_line;
    std::uint64_t seed = 0;
    std::string version;
    std::vector<std::pair<std::string, std::string>> input_digests;  // path -> fnv1a hex
    double runtime_seconds = 0.0;
    std::vector<std::string> output_paths;

    void write(const std::string& path) const;
};

/// FNV-1a 64-bit digest of a file's bytes, as hex.
std::string file_digest(const std::string& path);

}  // namespace spgarch
