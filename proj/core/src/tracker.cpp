#include "celltrack/tracker.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace celltrack {

namespace {

// The sequential solve can strand a row on a sink when a rival row of equal
// list value took its column first, and it is indifferent between
// orientations of exactly equal total value. A pairwise swap pass cleans up
// both: take any column exchange that strictly raises the summed matrix
// value, and among exact ties prefer the orientation that keeps every
// list-assigned region closest to where its cell was expected.
void refine_assignment(std::vector<int>& zeta, const AssociationMatrix& matrix,
                       const std::vector<Observation>& observations,
                       const std::vector<TrackedCell>& cells) {
    const int n1 = static_cast<int>(observations.size());
    const int n2 = static_cast<int>(cells.size());
    auto value = [&](int i, int col) {
        const double v = matrix.at(i, col);
        if (col <= matrix.new_col() && v == -1.0) return -1e6;
        return v;
    };
    auto gap = [&](int i, int col) {
        if (col >= n2) return 0.0;
        // Occluded cells have no recorded history, but their last observed
        // heading still says which way they were going into the merge.
        Vec2 expected = predicted_position(track_state(cells[col]));
        if (!cells[col].prev_position && cells[col].heading)
            expected = Vec2{cells[col].position.x + cells[col].heading->x,
                            cells[col].position.y + cells[col].heading->y};
        // Size similarity weighs in alongside position so that two cells of
        // different area crossing in parallel still sort out correctly.
        const double darea = std::abs(observations[i].features.area -
                                      cells[col].features.area);
        return distance(observations[i].features.centroid, expected) +
               0.5 * darea;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n1; ++i) {
            for (int i2 = i + 1; i2 < n1; ++i2) {
                const int j = zeta[i], j2 = zeta[i2];
                if (j == j2) continue;
                const double keep = value(i, j) + value(i2, j2);
                const double swapped = value(i, j2) + value(i2, j);
                const bool better = swapped > keep + 1e-9;
                const bool tied = std::abs(keep - swapped) <= 1e-9;
                if (!better &&
                    !(tied && gap(i, j2) + gap(i2, j) + 1e-9 <
                                  gap(i, j) + gap(i2, j2)))
                    continue;
                std::swap(zeta[i], zeta[i2]);
                changed = true;
            }
        }
    }
}

}  // namespace

Tracker::Tracker(DecisionTree t1, DecisionTree t2, TrackerParams params,
                 int width, int height)
    : t1_(std::move(t1)), t2_(std::move(t2)), params_(params), width_(width),
      height_(height) {
    if (!t1_.trained() || t1_.dimension != 23)
        throw std::invalid_argument("Tracker: t1 must be trained on 23-entry vectors");
    if (!t2_.trained() || t2_.dimension != 21)
        throw std::invalid_argument("Tracker: t2 must be trained on 21-entry vectors");
    if (width_ <= 0 || height_ <= 0)
        throw std::invalid_argument("Tracker: frame dimensions must be positive");
}

void Tracker::process_frame(const std::vector<Region>& regions, int frame_index) {
    std::vector<Observation> observations;
    observations.reserve(regions.size());
    for (const Region& region : regions)
        observations.push_back({region, extract_features(region)});

    std::vector<int> zeta;
    if (cells_.empty()) {
        // Nothing to match against: every region enters as a new cell.
        zeta.assign(observations.size(), 0);
        last_ = AssociationResult{};
        last_.assignment = zeta;
        update_list(cells_, observations, zeta, params_, frame_index, width_,
                    height_, next_id_);
    } else {
        AssociationMatrix matrix = build_matrix(observations, cells_, t1_, t2_,
                                                params_, frame_index, width_, height_);
        last_ = modified_hungarian(matrix);
        refine_assignment(last_.assignment, matrix, observations, cells_);
        zeta = last_.assignment;
        update_list(cells_, observations, zeta, params_, frame_index, width_,
                    height_, next_id_, &matrix);
    }
}

std::vector<TrajectoryRow> Tracker::rows() const {
    std::vector<TrajectoryRow> out;
    for (const TrackedCell& cell : cells_)
        for (const TrajectoryPoint& p : cell.trajectory)
            out.push_back({p.frame_index, cell.id, p.position.x, p.position.y,
                           p.status, p.area});
    std::sort(out.begin(), out.end(), [](const TrajectoryRow& a, const TrajectoryRow& b) {
        return a.frame_index != b.frame_index ? a.frame_index < b.frame_index
                                              : a.cell_id < b.cell_id;
    });
    return out;
}

}  // namespace celltrack
