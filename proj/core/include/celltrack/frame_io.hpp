#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "celltrack/image.hpp"

namespace celltrack {

// Binary 8-bit PGM (P5).
GrayFrame read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayFrame& frame, const std::filesystem::path& path);

// A frame directory holds frame_<index>.pgm with zero-padded 6-digit indices.
std::string frame_filename(int index);
std::vector<GrayFrame> read_frame_dir(const std::filesystem::path& dir);
void write_frame_dir(const std::vector<GrayFrame>& frames, const std::filesystem::path& dir);

// Raw container: magic + u32 width/height/count (little-endian) + concatenated frames.
std::vector<GrayFrame> read_raw_sequence(const std::filesystem::path& path);
void write_raw_sequence(const std::vector<GrayFrame>& frames, const std::filesystem::path& path);

// Dispatch on path type: directory of PGMs or a single raw container file.
std::vector<GrayFrame> load_frames(const std::filesystem::path& path);

}  // namespace celltrack
