#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spgarch/errors.hpp"

namespace spgarch {

/// One stored nonzero of a sparse weight matrix (0-based indices).
struct WeightEntry {
    int row;
    int col;
    double value;
};

enum class GridScheme { rook, queen };

/// Sparse non-negative spatial weight matrix with zero diagonal.
///
/// Entries are kept sorted by (row, col) and deduplicated; zeros are never
/// stored. Immutable after construction: every operation returns a new value.
class WeightMatrix {
public:
    WeightMatrix() = default;

    /// Builds from triplets. Duplicate (i,j) keys are summed. Rejects
    /// negative weights and nonzero diagonal entries.
    WeightMatrix(int n, std::vector<WeightEntry> entries);

    int size() const { return n_; }
    const std::vector<WeightEntry>& entries() const { return entries_; }
    bool row_standardized() const { return row_standardized_; }
    const std::optional<std::vector<int>>& triangular_order() const { return triangular_order_; }

    double at(int i, int j) const;
    std::vector<double> row_sums() const;
    double inf_norm() const;
    bool is_zero() const { return entries_.empty(); }

    /// Strictly lower triangular in the current index order (j < i for all
    /// stored entries).
    bool is_strictly_lower_triangular() const;

    /// True when permuting rows and columns by `perm` (perm[k] = original
    /// index placed at position k) gives a strictly lower triangular matrix.
    bool is_triangular_under(const std::vector<int>& perm) const;

    Eigen::SparseMatrix<double> to_eigen() const;

    /// Dense conversion guarded to n <= 4096.
    Eigen::MatrixXd to_dense() const;

private:
    int n_ = 0;
    std::vector<WeightEntry> entries_;
    bool row_standardized_ = false;
    std::optional<std::vector<int>> triangular_order_;

    friend WeightMatrix row_standardize(const WeightMatrix&);
    friend WeightMatrix lower_triangularize(const WeightMatrix&);
    friend WeightMatrix scale(const WeightMatrix&, double);
    friend std::optional<std::vector<int>> find_triangular_order(WeightMatrix&);
};

/// Binary contiguity matrix of a rows x cols lattice, indexed row-major so
/// cell (r,c) has 0-based index r*cols + c. Rook gives the 4-neighborhood,
/// queen the 8-neighborhood. Symmetric, zero diagonal.
WeightMatrix build_grid_contiguity(int rows, int cols, GridScheme scheme);

/// Divides each nonzero row by its sum; empty rows stay zero.
WeightMatrix row_standardize(const WeightMatrix& w);

/// Drops every entry with j >= i, making the matrix strictly lower
/// triangular in the current order. Clears the row_standardized flag.
WeightMatrix lower_triangularize(const WeightMatrix& w);

/// Topological order of the graph with an edge j -> i whenever w_ij > 0.
/// Returns nullopt when the graph has a cycle; on success also records the
/// order inside `w`.
std::optional<std::vector<int>> find_triangular_order(WeightMatrix& w);

/// Multiplies every weight by a non-negative factor.
WeightMatrix scale(const WeightMatrix& w_star, double factor);

/// Common topological order of the union support of two matrices, if any.
std::optional<std::vector<int>> find_joint_triangular_order(const WeightMatrix& a,
                                                            const WeightMatrix& b);

/// CSV triplet I/O: header `i,j,w`, 1-based indices.
WeightMatrix load_weights_csv(const std::string& path);
void save_weights_csv(const WeightMatrix& w, const std::string& path);

}  // namespace spgarch
