#include "celltrack/image.hpp"

#include <stdexcept>

namespace celltrack {

GrayFrame::GrayFrame(int w, int h, std::uint8_t fill, int frame_index)
    : width(w), height(h), index(frame_index) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("GrayFrame: dimensions must be positive");
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

}  // namespace celltrack
