#include "spgarch/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

#include "spgarch/csv.hpp"

namespace spgarch {

WeightMatrix::WeightMatrix(int n, std::vector<WeightEntry> entries) : n_(n) {
    if (n <= 0) throw Error("WeightMatrix: n must be positive");
    std::map<std::pair<int, int>, double> acc;
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
            throw Error("WeightMatrix: index out of range");
        if (e.value < 0.0) throw Error("WeightMatrix: negative weight");
        if (e.row == e.col && e.value != 0.0)
            throw Error("WeightMatrix: nonzero diagonal entry");
        if (e.value == 0.0) continue;
        acc[{e.row, e.col}] += e.value;
    }
    entries_.reserve(acc.size());
    for (const auto& [key, v] : acc)
        if (v != 0.0) entries_.push_back({key.first, key.second, v});
}

double WeightMatrix::at(int i, int j) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{i, j},
                               [](const WeightEntry& e, const std::pair<int, int>& k) {
                                   return std::pair{e.row, e.col} < k;
                               });
    if (it != entries_.end() && it->row == i && it->col == j) return it->value;
    return 0.0;
}

std::vector<double> WeightMatrix::row_sums() const {
    std::vector<double> sums(n_, 0.0);
    for (const auto& e : entries_) sums[e.row] += e.value;
    return sums;
}

double WeightMatrix::inf_norm() const {
    double m = 0.0;
    for (double s : row_sums()) m = std::max(m, s);
    return m;
}

bool WeightMatrix::is_strictly_lower_triangular() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const WeightEntry& e) { return e.col < e.row; });
}

bool WeightMatrix::is_triangular_under(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != n_) return false;
    std::vector<int> pos(n_, -1);
    for (int k = 0; k < n_; ++k) {
        if (perm[k] < 0 || perm[k] >= n_ || pos[perm[k]] != -1) return false;
        pos[perm[k]] = k;
    }
    return std::all_of(entries_.begin(), entries_.end(), [&](const WeightEntry& e) {
        return pos[e.col] < pos[e.row];
    });
}

Eigen::SparseMatrix<double> WeightMatrix::to_eigen() const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(entries_.size());
    for (const auto& e : entries_) trips.emplace_back(e.row, e.col, e.value);
    Eigen::SparseMatrix<double> m(n_, n_);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

Eigen::MatrixXd WeightMatrix::to_dense() const {
    if (n_ > 4096) throw Error("WeightMatrix: dense conversion limited to n <= 4096");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& e : entries_) m(e.row, e.col) = e.value;
    return m;
}

WeightMatrix build_grid_contiguity(int rows, int cols, GridScheme scheme) {
    if (rows <= 0 || cols <= 0)
        throw Error("build_grid_contiguity: rows and cols must be positive");
    std::vector<WeightEntry> entries;
    auto idx = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    if (scheme == GridScheme::rook && dr != 0 && dc != 0) continue;
                    int nr = r + dr, nc = c + dc;
                    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
                    entries.push_back({idx(r, c), idx(nr, nc), 1.0});
                }
            }
        }
    }
    return WeightMatrix(rows * cols, std::move(entries));
}

WeightMatrix row_standardize(const WeightMatrix& w) {
    WeightMatrix out = w;
    auto sums = w.row_sums();
    for (auto& e : out.entries_) e.value /= sums[e.row];
    out.row_standardized_ = true;
    return out;
}

WeightMatrix lower_triangularize(const WeightMatrix& w) {
    WeightMatrix out = w;
    std::erase_if(out.entries_, [](const WeightEntry& e) { return e.col >= e.row; });
    out.row_standardized_ = false;
    std::vector<int> identity(w.size());
    for (int i = 0; i < w.size(); ++i) identity[i] = i;
    out.triangular_order_ = std::move(identity);
    return out;
}

namespace {

// Kahn's algorithm on the graph with edge j -> i per nonzero w_ij.
std::optional<std::vector<int>> topological_order(
    int n, const std::vector<const std::vector<WeightEntry>*>& entry_lists) {
    std::vector<std::vector<int>> succ(n);
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<bool>> seen(n);
    for (auto& row : seen) row.assign(0, false);
    std::map<std::pair<int, int>, bool> edge_seen;
    for (const auto* list : entry_lists) {
        for (const auto& e : *list) {
            auto key = std::pair{e.col, e.row};
            if (edge_seen[key]) continue;
            edge_seen[key] = true;
            succ[e.col].push_back(e.row);
            ++indeg[e.row];
        }
    }
    // Min-heap keeps the order deterministic.
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push(i);
    std::vector<int> order;
    order.reserve(n);
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(v);
        for (int s : succ[v])
            if (--indeg[s] == 0) ready.push(s);
    }
    if (static_cast<int>(order.size()) != n) return std::nullopt;
    return order;
}

}  // namespace

std::optional<std::vector<int>> find_triangular_order(WeightMatrix& w) {
    auto order = topological_order(w.size(), {&w.entries()});
    if (order) w.triangular_order_ = *order;
    return order;
}

std::optional<std::vector<int>> find_joint_triangular_order(const WeightMatrix& a,
                                                            const WeightMatrix& b) {
    if (a.size() != b.size()) throw Error("find_joint_triangular_order: size mismatch");
    return topological_order(a.size(), {&a.entries(), &b.entries()});
}

WeightMatrix scale(const WeightMatrix& w_star, double factor) {
    if (factor < 0.0) throw Error("scale: negative factor");
    WeightMatrix out = w_star;
    if (factor == 0.0) {
        out.entries_.clear();
        out.row_standardized_ = false;
        return out;
    }
    for (auto& e : out.entries_) e.value *= factor;
    if (factor != 1.0) out.row_standardized_ = false;
    return out;
}

WeightMatrix load_weights_csv(const std::string& path) {
    auto table = read_csv(path);
    if (table.header != std::vector<std::string>{"i", "j", "w"})
        throw IoError("weights CSV: expected header i,j,w in " + path);
    std::vector<WeightEntry> entries;
    int n = 0;
    for (const auto& row : table.rows) {
        int i = static_cast<int>(row[0]);
        int j = static_cast<int>(row[1]);
        if (i < 1 || j < 1) throw IoError("weights CSV: indices are 1-based");
        n = std::max({n, i, j});
        entries.push_back({i - 1, j - 1, row[2]});
    }
    if (n == 0) throw IoError("weights CSV: no entries in " + path);
    return WeightMatrix(n, std::move(entries));
}

void save_weights_csv(const WeightMatrix& w, const std::string& path) {
    CsvWriter out(path, {"i", "j", "w"});
    for (const auto& e : w.entries())
        out.row({static_cast<double>(e.row + 1), static_cast<double>(e.col + 1), e.value});
}

}  // namespace spgarch
