#pragma once

#include <vector>

#include "celltrack/association.hpp"
#include "celltrack/dtree.hpp"
#include "celltrack/segmentation.hpp"

namespace celltrack {

struct TrajectoryRow {
    int frame_index = 0;
    int cell_id = 0;
    double x = 0.0;
    double y = 0.0;
    CellStatus status = CellStatus::New;
    int area = 0;
};

/// Frame-by-frame tracker state: decision trees, parameters, and the cell
/// list. Feed segmented regions one frame at a time in increasing frame
/// order; read trajectories back out when done.
class Tracker {
public:
    Tracker(DecisionTree t1, DecisionTree t2, TrackerParams params, int width,
            int height);

    void process_frame(const std::vector<Region>& regions, int frame_index);

    const std::vector<TrackedCell>& cells() const { return cells_; }

    /// All recorded trajectory points, ordered by frame then cell id.
    std::vector<TrajectoryRow> rows() const;

    /// Trace of the last assignment stage, for diagnostics.
    const AssociationResult& last_association() const { return last_; }

private:
    DecisionTree t1_;
    DecisionTree t2_;
    TrackerParams params_;
    int width_;
    int height_;
    std::vector<TrackedCell> cells_;
    AssociationResult last_;
    int next_id_ = 1;
};

}  // namespace celltrack
