#pragma once

#include <string>
#include <vector>

#include "celltrack/synthdata.hpp"
#include "celltrack/tracker.hpp"

namespace celltrack {

struct EvalParams {
    double match_radius = 30.0;    // max trajectory-to-truth center distance
    double occlusion_dist = 25.0;  // truth centers closer than this form an event
};

struct EvalReport {
    int frames = 0;
    int truth_rows = 0;       // visible truth entries
    int trajectory_rows = 0;  // active/new trajectory rows
    int matched_pairs = 0;
    int correct_pairs = 0;
    double accuracy = 0.0;
    int id_switches = 0;
    int occlusion_events = 0;
    int occlusion_events_scored = 0;  // events whose pre-event ids exist
    int occlusions_recovered = 0;
    double recovery_rate = 0.0;

    std::string to_text() const;
};

/// Trajectory file: header line, then `frame,cell_id,x,y,status,area` rows.
void write_trajectory(const std::string& path, const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> read_trajectory(const std::string& path);

/// Scores tracker output against ground truth. Per frame, active/new rows are
/// matched one-to-one to visible truth cells within match_radius; each tracker
/// id then maps to the truth id it matched most often. Accuracy is the
/// fraction of matches agreeing with that mapping. Occlusion events are
/// maximal runs of frames where two truth centers stay within occlusion_dist;
/// an event is recovered when both members keep their pre-event tracker ids
/// after it ends.
EvalReport evaluate(const std::vector<TrajectoryRow>& rows, const GroundTruth& truth,
                    const EvalParams& params = {});

}  // namespace celltrack
