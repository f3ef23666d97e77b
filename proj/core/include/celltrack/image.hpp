#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace celltrack {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// 8-bit single-channel image, row-major.
struct GrayFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    int index = 0;

    GrayFrame() = default;
    GrayFrame(int w, int h, std::uint8_t fill = 0, int frame_index = 0);

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t size() const { return pixels.size(); }
    bool same_shape(const GrayFrame& o) const { return width == o.width && height == o.height; }
};

/// Binary foreground mask over the same grid as a GrayFrame.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // 0 background, 1 foreground

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    bool operator==(const BinaryMask& o) const {
        return width == o.width && height == o.height && data == o.data;
    }
};

}  // namespace celltrack
