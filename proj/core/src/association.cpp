#include "celltrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "celltrack/hungarian.hpp"

namespace celltrack {
namespace {

// Stand-in for -1 markers during solves: low enough that a marker is never
// preferred over any real entry, finite so the solver stays numerically sane.
constexpr double kForbidden = -1e6;

double substituted(const AssociationMatrix& m, int row, int col) {
    double v = m.at(row, col);
    if (col <= m.new_col() && v == -1.0) return kForbidden;
    return v;
}

// New column on a strictly better value, occlusion column otherwise.
int better_sink(const AssociationMatrix& m, int row) {
    return substituted(m, row, m.new_col()) > m.at(row, m.occl_col())
               ? m.new_col()
               : m.occl_col();
}

}  // namespace

std::string to_string(CellStatus status) {
    switch (status) {
        case CellStatus::Active: return "active";
        case CellStatus::New: return "new";
        case CellStatus::Occluded: return "occluded";
        case CellStatus::Out: return "out";
    }
    throw std::invalid_argument("bad CellStatus value");
}

CellStatus status_from_string(const std::string& text) {
    if (text == "active") return CellStatus::Active;
    if (text == "new") return CellStatus::New;
    if (text == "occluded") return CellStatus::Occluded;
    if (text == "out") return CellStatus::Out;
    throw std::invalid_argument("unknown cell status: " + text);
}

TrackState track_state(const TrackedCell& cell) {
    return TrackState{cell.features, cell.position, cell.prev_position};
}

double border_distance(const Vec2& p, int width, int height) {
    return std::min(std::min(p.x, width - 1.0 - p.x),
                    std::min(p.y, height - 1.0 - p.y));
}

AssociationMatrix build_matrix(const std::vector<Observation>& observations,
                               const std::vector<TrackedCell>& cells,
                               const DecisionTree& t1, const DecisionTree& t2,
                               const TrackerParams& params, int frame_index,
                               int width, int height) {
    if (!t1.trained() || t1.dimension != 23)
        throw std::invalid_argument("build_matrix: t1 must be trained on 23-entry vectors");
    if (!t2.trained() || t2.dimension != 21)
        throw std::invalid_argument("build_matrix: t2 must be trained on 21-entry vectors");

    const int n1 = static_cast<int>(observations.size());
    const int n2 = static_cast<int>(cells.size());
    AssociationMatrix m(n1, n2);

    for (int i = 0; i < n1; ++i) {
        const Vec2 c = observations[i].features.centroid;
        const double db = border_distance(c, width, height);

        for (int j = 0; j < n2; ++j) {
            DiffVector v = diff_vector(observations[i].features, track_state(cells[j]));
            if (cells[j].status == CellStatus::Out) {
                m.at(i, j) = db > params.d0
                                 ? -1.0
                                 : params.alpha1 * t2.classify(truncate(v).v);
            } else {
                m.at(i, j) = t1.classify(v.v);
            }
        }

        m.at(i, m.new_col()) =
            db > params.d0 ? -1.0
                           : params.alpha2 * std::exp(-params.lambda1 * db * db);

        // Predicted cell density near the region minus observed region
        // density, both as Gaussian-weighted counts; positive when more cells
        // were expected here than regions were found.
        double predicted = 0.0;
        for (const TrackedCell& cell : cells) {
            if (cell.last_seen != frame_index - 1) continue;
            const double d = distance(c, predicted_position(track_state(cell)));
            predicted += std::exp(-params.lambda2 * d * d);
        }
        double observed = 0.0;
        for (const Observation& other : observations) {
            const double d = distance(c, other.features.centroid);
            observed += std::exp(-params.lambda2 * d * d);
        }
        m.at(i, m.occl_col()) = params.alpha3 * (predicted - observed);
    }
    return m;
}

AssociationResult modified_hungarian(const AssociationMatrix& m) {
    const int n1 = m.n_regions;
    const int n2 = m.n_cells;
    AssociationResult res;
    res.assignment.assign(n1, -1);
    if (n1 == 0) return res;

    // Rows whose best entry overall is a sink column skip the solve entirely.
    std::vector<int> active;
    for (int i = 0; i < n1; ++i) {
        int arg = 0;
        for (int j = 1; j < m.cols(); ++j)
            if (substituted(m, i, j) > substituted(m, i, arg)) arg = j;
        if (arg >= n2) {
            res.assignment[i] = arg;
            ++res.pre_assigned;
        } else {
            active.push_back(i);
        }
    }

    while (!active.empty()) {
        std::vector<std::vector<double>> sub(active.size(), std::vector<double>(n2));
        for (size_t r = 0; r < active.size(); ++r)
            for (int j = 0; j < n2; ++j) sub[r][j] = substituted(m, active[r], j);
        AssignmentResult sol = solve_max_assignment(sub);

        // A rectangular solve with more rows than list columns leaves rows
        // unmatched; sinks are the only unbounded columns, so they go there.
        std::vector<int> still_active;
        bool drained = false;
        for (size_t r = 0; r < active.size(); ++r) {
            if (sol.row_to_col[r] < 0) {
                res.assignment[active[r]] = better_sink(m, active[r]);
                ++res.leftover_to_sink;
                drained = true;
            } else {
                still_active.push_back(active[r]);
            }
        }
        if (drained) {
            active = std::move(still_active);
            continue;
        }

        // Single best strictly positive defection, ties to the lowest row.
        int defector = -1;
        double best_gain = 0.0;
        for (size_t r = 0; r < active.size(); ++r) {
            const int i = active[r];
            const double sink = std::max(substituted(m, i, m.new_col()),
                                         m.at(i, m.occl_col()));
            const double gain = sink - substituted(m, i, sol.row_to_col[r]);
            if (gain > best_gain) {
                best_gain = gain;
                defector = i;
            }
        }
        if (defector < 0) {
            for (size_t r = 0; r < active.size(); ++r)
                res.assignment[active[r]] = sol.row_to_col[r];
            break;
        }
        res.assignment[defector] = better_sink(m, defector);
        ++res.defections;
        active.erase(std::find(active.begin(), active.end(), defector));
    }

    for (int i = 0; i < n1; ++i) res.value += substituted(m, i, res.assignment[i]);
    return res;
}

AssociationResult brute_force_assignment(const AssociationMatrix& m) {
    const int n1 = m.n_regions;
    const int n2 = m.n_cells;
    if (n1 > 8 || n2 > 8)
        throw std::invalid_argument("brute_force_assignment: at most 8 regions and 8 cells");

    AssociationResult res;
    res.assignment.assign(n1, -1);
    if (n1 == 0) return res;

    std::vector<int> current(n1, -1);
    std::vector<char> used(n2, 0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_assignment;

    auto recurse = [&](auto&& self, int row, double total) -> void {
        if (row == n1) {
            if (total > best) {
                best = total;
                best_assignment = current;
            }
            return;
        }
        for (int j = 0; j < n2; ++j) {
            if (used[j]) continue;
            used[j] = 1;
            current[row] = j;
            self(self, row + 1, total + substituted(m, row, j));
            used[j] = 0;
        }
        for (int j = n2; j < n2 + 2; ++j) {
            current[row] = j;
            self(self, row + 1, total + substituted(m, row, j));
        }
    };
    recurse(recurse, 0, 0.0);

    res.assignment = best_assignment;
    res.value = best;
    return res;
}

void update_list(std::vector<TrackedCell>& cells,
                 const std::vector<Observation>& observations,
                 const std::vector<int>& assignment, const TrackerParams& params,
                 int frame_index, int width, int height, int& next_id,
                 const AssociationMatrix* matrix) {
    const int n1 = static_cast<int>(observations.size());
    const int n2 = static_cast<int>(cells.size());
    if (static_cast<int>(assignment.size()) != n1)
        throw std::invalid_argument("update_list: assignment size mismatch");
    for (int z : assignment)
        if (z < 0 || z >= n2 + 2)
            throw std::invalid_argument("update_list: assignment column out of range");
    if (matrix && (matrix->n_regions != n1 || matrix->n_cells != n2))
        throw std::invalid_argument("update_list: matrix shape mismatch");

    std::vector<char> cell_taken(n2, 0);

    // A zero-probability match is an artifact of forcing a full assignment,
    // not a detection; dropping it here lets proximity decide instead.
    std::vector<char> dropped(n1, 0);
    if (matrix) {
        for (int i = 0; i < n1; ++i)
            if (assignment[i] < n2 && matrix->at(i, assignment[i]) <= 0.0)
                dropped[i] = 1;
    }

    auto refresh = [&](TrackedCell& cell, const Observation& obs) {
        // A cell coming back from out has been gone for an unknown stretch;
        // restarting its history avoids a bogus velocity estimate.
        if (cell.status == CellStatus::Out) {
            cell.prev_position = std::nullopt;
            cell.heading = std::nullopt;
        } else {
            cell.prev_position = cell.position;
            cell.heading = Vec2{obs.features.centroid.x - cell.position.x,
                                obs.features.centroid.y - cell.position.y};
        }
        cell.position = obs.features.centroid;
        cell.features = obs.features;
        cell.status = CellStatus::Active;
        cell.last_seen = frame_index;
        cell.trajectory.push_back(
            {frame_index, cell.position, CellStatus::Active, cell.features.area});
    };

    // Matched regions refresh their cells.
    for (int i = 0; i < n1; ++i) {
        if (assignment[i] < n2 && !dropped[i]) {
            if (cell_taken[assignment[i]])
                throw std::invalid_argument("update_list: list column assigned twice");
            refresh(cells[assignment[i]], observations[i]);
            cell_taken[assignment[i]] = 1;
        }
    }

    // Occlusion-column regions pin nearby unassociated fresh cells to their
    // centroid with frozen features and no motion history; `heading` keeps
    // the pre-merge direction. Regions that pin nothing stay available as
    // force-association targets.
    std::vector<int> spare_regions;
    for (int i = 0; i < n1; ++i)
        if (dropped[i]) spare_regions.push_back(i);
    for (int i = 0; i < n1; ++i) {
        if (assignment[i] != n2 + 1) continue;
        const Vec2 c = observations[i].features.centroid;
        int pinned = 0;
        for (int j = 0; j < n2; ++j) {
            if (cell_taken[j] || cells[j].last_seen != frame_index - 1) continue;
            if (distance(cells[j].position, c) > params.d0) continue;
            cells[j].status = CellStatus::Occluded;
            cells[j].position = c;
            cells[j].prev_position = std::nullopt;
            cells[j].last_seen = frame_index;
            cells[j].trajectory.push_back(
                {frame_index, c, CellStatus::Occluded, cells[j].features.area});
            cell_taken[j] = 1;
            ++pinned;
        }
        if (pinned == 0) spare_regions.push_back(i);
    }

    // New-column regions are also up for grabs: a spawn right next to a cell
    // that just lost its region is nearly always that cell, so leftover
    // settling gets first pick and only unclaimed regions spawn.
    for (int i = 0; i < n1; ++i)
        if (assignment[i] == n2) spare_regions.push_back(i);

    // Cells still unaccounted for take the closest spare region within d0,
    // leave through the border when there is none, or keep their stale
    // position until a region frees up. Cells seen last frame get first pick.
    auto settle_leftover = [&](TrackedCell& cell) {
        int best = -1;
        double best_dist = params.d0;
        for (size_t s = 0; s < spare_regions.size(); ++s) {
            const int i = spare_regions[s];
            if (i < 0) continue;
            const double d =
                distance(cell.position, observations[i].features.centroid);
            if (d <= best_dist) {
                best_dist = d;
                best = static_cast<int>(s);
            }
        }
        if (best >= 0) {
            refresh(cell, observations[spare_regions[best]]);
            spare_regions[best] = -1;
            return;
        }
        if (border_distance(cell.position, width, height) <= params.d0 &&
            cell.status != CellStatus::Out) {
            cell.status = CellStatus::Out;
            cell.trajectory.push_back({frame_index, cell.position,
                                       CellStatus::Out, cell.features.area});
        }
    };
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < n2; ++j) {
            if (cell_taken[j] || cells[j].last_seen >= frame_index) continue;
            const bool fresh = cells[j].last_seen == frame_index - 1;
            if (fresh != (pass == 0)) continue;
            settle_leftover(cells[j]);
            if (cells[j].last_seen == frame_index) cell_taken[j] = 1;
        }
    }

    // Whatever the leftovers did not claim spawns; list indices in
    // `assignment` stay valid because nothing is appended before this point.
    for (int i = 0; i < n1; ++i) {
        if (assignment[i] != n2) continue;
        bool claimed = true;
        for (int s : spare_regions)
            if (s == i) claimed = false;
        if (claimed) continue;
        TrackedCell cell;
        cell.id = next_id++;
        cell.status = CellStatus::New;
        cell.features = observations[i].features;
        cell.position = observations[i].features.centroid;
        cell.last_seen = frame_index;
        cell.trajectory.push_back(
            {frame_index, cell.position, CellStatus::New, cell.features.area});
        cells.push_back(std::move(cell));
    }
}

}  // namespace celltrack
