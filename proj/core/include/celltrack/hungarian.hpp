#pragma once

#include <vector>

namespace celltrack {

struct AssignmentResult {
    std::vector<int> row_to_col;  // -1 when a row is unmatched
    double value = 0.0;           // sum of matched entries
};

/// Maximum-total-value assignment on a rectangular matrix. Exactly
/// min(rows, cols) pairs are matched; negative entries are legal (a forbidden
/// pair is encoded by the caller as a large negative value).
AssignmentResult solve_max_assignment(const std::vector<std::vector<double>>& values);

}  // namespace celltrack
