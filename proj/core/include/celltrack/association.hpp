#pragma once

#include <optional>
#include <string>
#include <vector>

#include "celltrack/dtree.hpp"
#include "celltrack/features.hpp"
#include "celltrack/segmentation.hpp"

namespace celltrack {

enum class CellStatus { Active, New, Occluded, Out };

std::string to_string(CellStatus status);
CellStatus status_from_string(const std::string& text);

struct TrajectoryPoint {
    int frame_index = 0;
    Vec2 position;
    CellStatus status = CellStatus::New;
    int area = 0;
};

/// A cell on the tracker's list. `position` and `prev_position` are the two
/// most recent recorded centers; while a cell is occluded both are pinned to
/// the occluding region's centroid and `features` stay frozen at their last
/// directly observed values. `heading` is the last observed per-frame
/// displacement and survives occlusion, unlike `prev_position`.
struct TrackedCell {
    int id = 0;
    CellStatus status = CellStatus::New;
    FeatureSet features;
    Vec2 position;
    std::optional<Vec2> prev_position;
    std::optional<Vec2> heading;
    int last_seen = 0;
    std::vector<TrajectoryPoint> trajectory;
};

TrackState track_state(const TrackedCell& cell);

struct TrackerParams {
    double alpha1 = 0.1;
    double alpha2 = 0.1;
    double alpha3 = 0.8;
    double lambda1 = 0.00008;
    double lambda2 = 0.00005;
    double d0 = 70.0;  // assumed maximum cell speed, px/frame
};

/// A segmented region paired with its extracted features.
struct Observation {
    Region region;
    FeatureSet features;
};

/// Region-by-candidate confidence matrix with two extra sink columns. Column
/// j < n_cells scores association with list cell j, column new_col() scores
/// the region entering as a new cell, and column occl_col() scores it being a
/// merge of occluded cells. Entries of exactly -1 in the first n_cells + 1
/// columns mark forbidden pairs; the occlusion column never holds markers.
struct AssociationMatrix {
    int n_regions = 0;
    int n_cells = 0;
    std::vector<double> values;  // row-major, n_regions x (n_cells + 2)

    AssociationMatrix() = default;
    AssociationMatrix(int regions, int cells)
        : n_regions(regions), n_cells(cells),
          values(static_cast<size_t>(regions) * (cells + 2), 0.0) {}

    int cols() const { return n_cells + 2; }
    int new_col() const { return n_cells; }
    int occl_col() const { return n_cells + 1; }
    double& at(int row, int col) { return values[static_cast<size_t>(row) * cols() + col]; }
    double at(int row, int col) const { return values[static_cast<size_t>(row) * cols() + col]; }
};

/// Distance from a point to the nearest image edge.
double border_distance(const Vec2& p, int width, int height);

/// Builds the association matrix for one frame. `t1` scores full difference
/// vectors against active, new, and occluded cells; `t2` scores truncated
/// vectors against out cells near the border.
AssociationMatrix build_matrix(const std::vector<Observation>& observations,
                               const std::vector<TrackedCell>& cells,
                               const DecisionTree& t1, const DecisionTree& t2,
                               const TrackerParams& params, int frame_index,
                               int width, int height);

/// One column choice per region: a list column, new_col(), or occl_col().
/// `value` is the objective over the marker-substituted matrix. The trace
/// counters record which stages of modified_hungarian acted; brute force
/// leaves them zero.
struct AssociationResult {
    std::vector<int> assignment;
    double value = 0.0;
    int pre_assigned = 0;      // rows whose global argmax was a sink column
    int leftover_to_sink = 0;  // rows unmatched by a rectangular solve
    int defections = 0;        // rows re-routed to a sink by the improvement loop
};

/// Iterative assignment: sink-preferring rows are pre-assigned, the rest are
/// matched to list columns by a standard solve, then rows that strictly gain
/// by defecting to a sink are removed one at a time and the solve repeats.
/// Feasible (no list column reused) but not guaranteed optimal.
AssociationResult modified_hungarian(const AssociationMatrix& matrix);

/// Exhaustive maximization over the same feasible set and objective,
/// usable up to 8 regions and 8 cells.
AssociationResult brute_force_assignment(const AssociationMatrix& matrix);

/// Applies one frame's assignment to the cell list: matched cells are
/// refreshed, new-column regions spawn cells, occlusion-column regions pin
/// nearby unassociated cells to their centroid, and cells left over either go
/// out at the border or are force-matched to a spare region. `next_id`
/// supplies fresh cell ids and is advanced. When `matrix` is given, list
/// matches with nonpositive value are discarded: the classifier offered no
/// evidence for the pair, so the region is kept as a spare target and the
/// cell falls through to force-association.
void update_list(std::vector<TrackedCell>& cells,
                 const std::vector<Observation>& observations,
                 const std::vector<int>& assignment, const TrackerParams& params,
                 int frame_index, int width, int height, int& next_id,
                 const AssociationMatrix* matrix = nullptr);

}  // namespace celltrack
