#pragma once

#include <filesystem>
#include <string>

#include "celltrack/association.hpp"
#include "celltrack/dtree.hpp"
#include "celltrack/metrics.hpp"
#include "celltrack/segmentation.hpp"
#include "celltrack/synthdata.hpp"

namespace celltrack {

/// Every tunable in one place, serialized as flat `key = value` text.
struct PipelineConfig {
    SegmentationParams seg;
    TrainConfig train;
    TrackerParams tracker;
    SynthConfig synth;
    EvalParams eval;
};

std::string dump_config(const PipelineConfig& config);

/// Parses `key = value` lines over the given defaults. Blank lines and
/// `#` comments are ignored; unknown keys and unparseable values are errors.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

}  // namespace celltrack
