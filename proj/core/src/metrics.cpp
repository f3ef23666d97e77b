#include "celltrack/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "celltrack/hungarian.hpp"

namespace celltrack {

void write_trajectory(const std::string& path, const std::vector<TrajectoryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
    out << "frame,cell_id,x,y,status,area\n";
    char line[160];
    for (const TrajectoryRow& r : rows) {
        std::snprintf(line, sizeof line, "%d,%d,%.6f,%.6f,%s,%d\n", r.frame_index,
                      r.cell_id, r.x, r.y, to_string(r.status).c_str(), r.area);
        out << line;
    }
    if (!out) throw std::runtime_error("failed writing trajectory file: " + path);
}

std::vector<TrajectoryRow> read_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "frame,cell_id,x,y,status,area")
        throw std::runtime_error("bad trajectory file header: " + path);

    std::vector<TrajectoryRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        TrajectoryRow r;
        char status[32];
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%31[^,],%d", &r.frame_index,
                        &r.cell_id, &r.x, &r.y, status, &r.area) != 6)
            throw std::runtime_error("bad trajectory row at " + path + ":" +
                                     std::to_string(line_no));
        r.status = status_from_string(status);
        rows.push_back(r);
    }
    return rows;
}

namespace {

struct Match {
    int frame;
    int cell_id;
    int truth_id;
};

}  // namespace

EvalReport evaluate(const std::vector<TrajectoryRow>& rows, const GroundTruth& truth,
                    const EvalParams& params) {
    EvalReport rep;

    // Visible truth and reported positions, per frame. std::map keeps frame
    // and id iteration order deterministic.
    std::map<int, std::vector<const TruthEntry*>> truth_by_frame;
    std::map<int, int> frames_seen;
    for (const TruthEntry& e : truth.entries) {
        ++frames_seen[e.frame];
        if (!e.visible) continue;
        truth_by_frame[e.frame].push_back(&e);
        ++rep.truth_rows;
    }
    rep.frames = static_cast<int>(frames_seen.size());

    std::map<int, std::vector<const TrajectoryRow*>> rows_by_frame;
    for (const TrajectoryRow& r : rows) {
        if (r.status != CellStatus::Active && r.status != CellStatus::New) continue;
        rows_by_frame[r.frame_index].push_back(&r);
        ++rep.trajectory_rows;
    }

    // One-to-one per-frame matching within match_radius.
    std::vector<Match> matches;
    for (const auto& [frame, truths] : truth_by_frame) {
        auto it = rows_by_frame.find(frame);
        if (it == rows_by_frame.end()) continue;
        const auto& reported = it->second;

        std::vector<std::vector<double>> value(
            reported.size(), std::vector<double>(truths.size()));
        for (size_t r = 0; r < reported.size(); ++r)
            for (size_t t = 0; t < truths.size(); ++t) {
                const double d = distance({reported[r]->x, reported[r]->y},
                                          truths[t]->center);
                value[r][t] = d <= params.match_radius ? params.match_radius - d : -1e9;
            }
        AssignmentResult sol = solve_max_assignment(value);
        for (size_t r = 0; r < reported.size(); ++r) {
            const int t = sol.row_to_col[r];
            if (t < 0 || value[r][t] < 0.0) continue;
            matches.push_back({frame, reported[r]->cell_id, truths[t]->id});
        }
    }
    rep.matched_pairs = static_cast<int>(matches.size());

    // Majority-vote identity map: tracker id -> most frequent truth id.
    std::map<int, std::map<int, int>> votes;
    for (const Match& m : matches) ++votes[m.cell_id][m.truth_id];
    std::map<int, int> cell_to_truth;
    for (const auto& [cell, counts] : votes) {
        int best_id = -1, best_count = 0;
        for (const auto& [id, count] : counts)
            if (count > best_count) {
                best_id = id;
                best_count = count;
            }
        cell_to_truth[cell] = best_id;
    }
    for (const Match& m : matches)
        if (cell_to_truth[m.cell_id] == m.truth_id) ++rep.correct_pairs;
    rep.accuracy =
        rep.matched_pairs > 0 ? double(rep.correct_pairs) / rep.matched_pairs : 0.0;

    // Per truth id, the matched tracker id in frame order; a change between
    // consecutive matched frames is an id switch.
    std::map<int, std::vector<std::pair<int, int>>> track_of;  // truth -> (frame, cell)
    for (const Match& m : matches) track_of[m.truth_id].push_back({m.frame, m.cell_id});
    for (auto& [id, seq] : track_of) {
        std::sort(seq.begin(), seq.end());
        for (size_t i = 1; i < seq.size(); ++i)
            if (seq[i].second != seq[i - 1].second) ++rep.id_switches;
    }

    // Occlusion events from truth geometry, then pre/post id comparison.
    std::map<int, std::map<int, Vec2>> centers;  // frame -> id -> center
    std::vector<int> ids;
    for (const TruthEntry& e : truth.entries) {
        if (e.visible) centers[e.frame][e.id] = e.center;
        if (std::find(ids.begin(), ids.end(), e.id) == ids.end()) ids.push_back(e.id);
    }
    std::sort(ids.begin(), ids.end());

    auto matched_cell_before = [&](int truth_id, int frame) -> int {
        const auto& seq = track_of[truth_id];
        int cell = -1;
        for (const auto& [f, c] : seq) {
            if (f >= frame) break;
            cell = c;
        }
        return cell;
    };
    auto matched_cell_after = [&](int truth_id, int frame) -> int {
        for (const auto& [f, c] : track_of[truth_id])
            if (f > frame) return c;
        return -1;
    };

    for (size_t i = 0; i < ids.size(); ++i) {
        for (size_t j = i + 1; j < ids.size(); ++j) {
            int run_start = -1, prev_frame = -2;
            auto close_event = [&](int run_end) {
                ++rep.occlusion_events;
                const int pre_a = matched_cell_before(ids[i], run_start);
                const int pre_b = matched_cell_before(ids[j], run_start);
                if (pre_a < 0 || pre_b < 0) return;
                ++rep.occlusion_events_scored;
                if (matched_cell_after(ids[i], run_end) == pre_a &&
                    matched_cell_after(ids[j], run_end) == pre_b)
                    ++rep.occlusions_recovered;
            };
            for (const auto& [frame, by_id] : centers) {
                auto a = by_id.find(ids[i]);
                auto b = by_id.find(ids[j]);
                const bool close =
                    a != by_id.end() && b != by_id.end() &&
                    distance(a->second, b->second) < params.occlusion_dist;
                if (close) {
                    if (run_start < 0 || frame != prev_frame + 1) {
                        if (run_start >= 0) close_event(prev_frame);
                        run_start = frame;
                    }
                    prev_frame = frame;
                } else if (run_start >= 0 && frame > prev_frame) {
                    close_event(prev_frame);
                    run_start = -1;
                }
            }
            if (run_start >= 0) close_event(prev_frame);
        }
    }
    rep.recovery_rate = rep.occlusion_events_scored > 0
                            ? double(rep.occlusions_recovered) / rep.occlusion_events_scored
                            : 1.0;
    return rep;
}

std::string EvalReport::to_text() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "frames                   %d\n"
                  "truth rows               %d\n"
                  "trajectory rows          %d\n"
                  "matched pairs            %d\n"
                  "correct pairs            %d\n"
                  "association accuracy     %.4f\n"
                  "id switches              %d\n"
                  "occlusion events         %d\n"
                  "occlusion events scored  %d\n"
                  "occlusions recovered     %d\n"
                  "occlusion recovery rate  %.4f\n",
                  frames, truth_rows, trajectory_rows, matched_pairs, correct_pairs,
                  accuracy, id_switches, occlusion_events, occlusion_events_scored,
                  occlusions_recovered, recovery_rate);
    return buf;
}

}  // namespace celltrack
