#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "celltrack/dtree.hpp"
#include "celltrack/image.hpp"
#include "celltrack/segmentation.hpp"

namespace celltrack {

struct IntensityProfile {
    double cell_base = 200.0;   // nominal center intensity
    double base_jitter = 25.0;  // per-cell uniform variation around cell_base
    double falloff = 0.35;      // fractional fade from ellipse center to rim
};

struct SynthConfig {
    int width = 640;
    int height = 512;
    int frames = 300;
    int n_cells = 10;
    double speed_min = 5.0;   // px/frame
    double speed_max = 40.0;  // px/frame
    double size_min = 150.0;  // area, px
    double size_max = 400.0;  // area, px
    IntensityProfile intensity;
    double background_level = 40.0;
    double noise_sigma = 2.0;
    double heading_jitter = 0.15;  // per-frame heading wobble, radians
    double occlusion_rate = 0.0;   // per-pair chance at each scheduling window
    int occlusion_events = -1;  // exact count of scripted meetups when >= 0
    int border_events = 0;      // scripted exit/re-entry count
    uint64_t seed = 1;
};

/// One cell in one frame: true identity, center, whether any of its pixels
/// landed inside the frame, and the pixels it covered (shared pixels appear
/// in every covering cell's list).
struct TruthEntry {
    int frame = 0;
    int id = 0;
    Vec2 center;
    bool visible = false;
    std::vector<std::pair<int, int>> pixels;
};

struct GroundTruth {
    std::vector<TruthEntry> entries;  // ordered by frame, then id
};

struct SequenceData {
    std::vector<GrayFrame> frames;
    GroundTruth truth;
};

/// Renders a sequence of elliptical cells wandering with bounded turn rate,
/// optionally scripted to meet pairwise (occlusions) or to leave through a
/// border and come back. Deterministic for a fixed config.
SequenceData generate_sequence(const SynthConfig& config);

/// Segments every frame, maps regions to truth ids by pixel ownership, and
/// emits one labeled difference-vector row per region pair (frame k-gap,
/// frame k) whose centers lie within `pair_radius`. gap 1 produces 23-entry
/// rows; larger gaps drop the position entries. A region is a view of a cell
/// when that cell owns nearly all of it; regions where no cell holds even a
/// majority are merged blobs and emit non-match rows, and the band between
/// is too ambiguous to label either way.
TrainingSet label_pairs(const std::vector<GrayFrame>& frames,
                        const GroundTruth& truth, int gap,
                        const SegmentationParams& seg_params,
                        double pair_radius = 1e18);

/// Drops the two position entries from every 23-entry row, the dataset a
/// re-entry classifier trains on.
TrainingSet truncate_pairs(const TrainingSet& set);

/// Truth file: header line, then one `frame,id,x,y,visible` row per entry.
/// Pixel sets are not stored.
void write_truth(const std::string& path, const GroundTruth& truth);
GroundTruth read_truth(const std::string& path);

}  // namespace celltrack
