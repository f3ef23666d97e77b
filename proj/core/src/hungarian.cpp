#include "celltrack/hungarian.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace celltrack {

// Kuhn-Munkres with potentials (shortest augmenting paths), O(n^3). Solves a
// square min-cost problem; the public maximizing, rectangular interface pads
// with zero-cost dummy rows/columns and negates.
AssignmentResult solve_max_assignment(const std::vector<std::vector<double>>& values) {
    const int rows = static_cast<int>(values.size());
    const int cols = rows > 0 ? static_cast<int>(values[0].size()) : 0;
    for (const auto& row : values)
        if (static_cast<int>(row.size()) != cols)
            throw std::invalid_argument("assignment: ragged matrix");

    AssignmentResult result;
    result.row_to_col.assign(rows, -1);
    if (rows == 0 || cols == 0) return result;

    const int n = std::max(rows, cols);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    auto cost = [&](int i, int j) {
        return (i < rows && j < cols) ? -values[i][j] : 0.0;
    };

    // 1-based potentials; p[j] holds the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    for (int j = 1; j <= n; ++j) {
        int i = p[j];
        if (i >= 1 && i <= rows && j <= cols) result.row_to_col[i - 1] = j - 1;
    }
    for (int i = 0; i < rows; ++i)
        if (result.row_to_col[i] >= 0) result.value += values[i][result.row_to_col[i]];
    return result;
}

}  // namespace celltrack
