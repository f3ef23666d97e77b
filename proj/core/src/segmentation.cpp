#include "celltrack/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace celltrack {

Vec2 Region::centroid() const {
    double sx = 0.0, sy = 0.0;
    for (const auto& p : pixels) {
        sx += p.x;
        sy += p.y;
    }
    double n = static_cast<double>(pixels.size());
    return {sx / n, sy / n};
}

BackgroundModel compute_background(const std::vector<GrayFrame>& frames, int window) {
    if (window < 1) throw std::invalid_argument("compute_background: window must be >= 1");
    if (static_cast<int>(frames.size()) < window)
        throw std::invalid_argument("compute_background: fewer frames than window");
    const GrayFrame& first = frames.front();
    for (int k = 1; k < window; ++k)
        if (!frames[k].same_shape(first))
            throw std::invalid_argument("compute_background: frame dimension mismatch");

    BackgroundModel bg;
    bg.window = window;
    bg.image = GrayFrame(first.width, first.height);
    std::vector<std::uint8_t> trace(window);
    const std::size_t n = first.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < window; ++k) trace[k] = frames[k].pixels[i];
        std::sort(trace.begin(), trace.end());
        if (window % 2 == 1) {
            bg.image.pixels[i] = trace[window / 2];
        } else {
            // even window: mean of the two middle values, rounded half away from zero
            int sum = trace[window / 2 - 1] + trace[window / 2];
            bg.image.pixels[i] = static_cast<std::uint8_t>((sum + 1) / 2);
        }
    }
    return bg;
}

GrayFrame difference_image(const GrayFrame& frame, const BackgroundModel& bg) {
    if (!frame.same_shape(bg.image))
        throw std::invalid_argument("difference_image: dimension mismatch");
    GrayFrame diff(frame.width, frame.height, 0, frame.index);
    for (std::size_t i = 0; i < frame.size(); ++i)
        diff.pixels[i] = static_cast<std::uint8_t>(
            std::abs(static_cast<int>(frame.pixels[i]) - static_cast<int>(bg.image.pixels[i])));
    return diff;
}

BinaryMask binarize(const GrayFrame& diff, int threshold) {
    if (threshold < 0 || threshold > 255)
        throw std::invalid_argument("binarize: threshold out of range [0,255]");
    BinaryMask mask(diff.width, diff.height);
    for (std::size_t i = 0; i < diff.size(); ++i)
        mask.data[i] = diff.pixels[i] > threshold ? 1 : 0;
    return mask;
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    if (w == 0 || h == 0) return mask;
    // Flood-fill background (4-connectivity) from the border; unreached background
    // pixels are enclosed holes and become foreground.
    std::vector<std::uint8_t> reached(mask.data.size(), 0);
    std::vector<int> stack;
    auto push_if_bg = [&](int x, int y) {
        int idx = y * w + x;
        if (!mask.data[idx] && !reached[idx]) {
            reached[idx] = 1;
            stack.push_back(idx);
        }
    };
    for (int x = 0; x < w; ++x) {
        push_if_bg(x, 0);
        push_if_bg(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push_if_bg(0, y);
        push_if_bg(w - 1, y);
    }
    while (!stack.empty()) {
        int idx = stack.back();
        stack.pop_back();
        int x = idx % w, y = idx / w;
        if (x > 0) push_if_bg(x - 1, y);
        if (x < w - 1) push_if_bg(x + 1, y);
        if (y > 0) push_if_bg(x, y - 1);
        if (y < h - 1) push_if_bg(x, y + 1);
    }
    BinaryMask filled(w, h);
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        filled.data[i] = (mask.data[i] || !reached[i]) ? 1 : 0;
    return filled;
}

std::vector<Region> connected_components(const BinaryMask& mask, const GrayFrame& frame,
                                         int min_area) {
    if (mask.width != frame.width || mask.height != frame.height)
        throw std::invalid_argument("connected_components: mask/frame dimension mismatch");
    if (min_area < 1) throw std::invalid_argument("connected_components: min_area must be >= 1");

    const int w = mask.width, h = mask.height;
    std::vector<std::uint8_t> visited(mask.data.size(), 0);
    std::vector<int> stack;
    std::vector<Region> regions;

    static constexpr std::array<std::array<int, 2>, 8> kNeighbors8 = {
        {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

    for (int start = 0; start < static_cast<int>(mask.data.size()); ++start) {
        if (!mask.data[start] || visited[start]) continue;
        Region region;
        region.frame_index = frame.index;
        region.bbox = {w, h, -1, -1};
        visited[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            int idx = stack.back();
            stack.pop_back();
            int x = idx % w, y = idx / w;
            region.pixels.push_back({x, y, frame.pixels[idx]});
            region.bbox.min_x = std::min(region.bbox.min_x, x);
            region.bbox.min_y = std::min(region.bbox.min_y, y);
            region.bbox.max_x = std::max(region.bbox.max_x, x);
            region.bbox.max_y = std::max(region.bbox.max_y, y);
            for (const auto& d : kNeighbors8) {
                int nx = x + d[0], ny = y + d[1];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                int nidx = ny * w + nx;
                if (mask.data[nidx] && !visited[nidx]) {
                    visited[nidx] = 1;
                    stack.push_back(nidx);
                }
            }
        }
        if (region.area() >= min_area) regions.push_back(std::move(region));
    }
    return regions;
}

int otsu_threshold(const GrayFrame& diff) {
    std::array<std::int64_t, 256> hist{};
    for (auto p : diff.pixels) ++hist[p];
    const double total = static_cast<double>(diff.size());
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];

    double sum_bg = 0.0, weight_bg = 0.0;
    double best_var = -1.0;
    int best_t = 0;
    for (int t = 0; t < 256; ++t) {
        weight_bg += static_cast<double>(hist[t]);
        if (weight_bg == 0.0) continue;
        double weight_fg = total - weight_bg;
        if (weight_fg == 0.0) break;
        sum_bg += static_cast<double>(t) * hist[t];
        double mean_bg = sum_bg / weight_bg;
        double mean_fg = (sum_all - sum_bg) / weight_fg;
        double between = weight_bg * weight_fg * (mean_bg - mean_fg) * (mean_bg - mean_fg);
        if (between > best_var) {
            best_var = between;
            best_t = t;
        }
    }
    return best_t;
}

std::vector<Region> segment_frame(const GrayFrame& frame, const BackgroundModel& bg,
                                  const SegmentationParams& params) {
    GrayFrame diff = difference_image(frame, bg);
    int threshold = params.threshold >= 0 ? params.threshold : otsu_threshold(diff);
    BinaryMask mask = fill_holes(binarize(diff, threshold));
    return connected_components(mask, frame, params.min_area);
}

}  // namespace celltrack
