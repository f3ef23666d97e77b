#pragma once

#include <cstdint>
#include <vector>

#include "celltrack/image.hpp"

namespace celltrack {

/// Per-pixel temporal median over a window of frames.
struct BackgroundModel {
    GrayFrame image;
    int window = 0;
};

struct RegionPixel {
    int x = 0;
    int y = 0;
    std::uint8_t intensity = 0;
};

struct BBox {
    int min_x = 0;
    int min_y = 0;
    int max_x = 0;
    int max_y = 0;
};

/// One 8-connected foreground component of a segmented frame.
struct Region {
    std::vector<RegionPixel> pixels;
    int frame_index = 0;
    BBox bbox;

    int area() const { return static_cast<int>(pixels.size()); }
    Vec2 centroid() const;
};

struct SegmentationParams {
    int threshold = -1;   // intensity threshold on |frame - background|; -1 selects Otsu per frame
    int min_area = 50;    // discard components smaller than this
    int bg_window = 20;   // frames used for the background median
};

BackgroundModel compute_background(const std::vector<GrayFrame>& frames, int window);
GrayFrame difference_image(const GrayFrame& frame, const BackgroundModel& bg);
BinaryMask binarize(const GrayFrame& diff, int threshold);
BinaryMask fill_holes(const BinaryMask& mask);
std::vector<Region> connected_components(const BinaryMask& mask, const GrayFrame& frame,
                                         int min_area);

/// Otsu's threshold over the intensity histogram of a difference image.
int otsu_threshold(const GrayFrame& diff);

/// Full per-frame chain: difference, threshold (fixed or Otsu), hole fill, components.
std::vector<Region> segment_frame(const GrayFrame& frame, const BackgroundModel& bg,
                                  const SegmentationParams& params);

}  // namespace celltrack
