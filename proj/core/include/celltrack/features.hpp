#pragma once

#include <array>
#include <optional>

#include "celltrack/image.hpp"
#include "celltrack/segmentation.hpp"

namespace celltrack {

inline constexpr std::array<int, 4> kMomentOrders = {3, 4, 5, 6};
inline constexpr std::array<double, 4> kInertiaOrders = {1.0, 2.0, 3.0, 0.5};
inline constexpr std::array<double, 4> kPolyOrders = {1.0, 2.0, 3.0, 0.5};
inline constexpr std::array<int, 4> kGaussOrders = {2, 4, 6, 8};

/// Per-region shape and intensity statistics.
///
/// The standard deviation keeps the 1/N factor outside the radical,
/// sqrt(sum((I-mu)^2))/N, so it is the conventional population sigma divided
/// by sqrt(N). Skewness and kurtosis normalize by this sigma, and all
/// expectations are plain means over the region's pixels.
struct FeatureSet {
    int area = 0;
    Vec2 centroid;
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    std::array<double, 4> central_moment_roots{};  // orders 3, 4, 5, 6
    std::array<double, 4> inertias{};              // orders 1, 2, 3, 0.5
    std::array<double, 4> poly_features{};         // orders 1, 2, 3, 0.5
    std::array<double, 4> gauss_features{};        // orders 2, 4, 6, 8
};

/// 23-entry feature difference vector between a current region and a tracked cell.
/// Entries 0 and 1 are the predicted-center and center distances; the rest are
/// absolute feature differences in the fixed order area, mean, stddev, skewness,
/// kurtosis, moment roots, inertias, polynomial features, Gaussian features.
struct DiffVector {
    std::array<double, 23> v{};
};

/// DiffVector with the two position entries dropped.
struct TruncatedDiffVector {
    std::array<double, 21> v{};
};

/// The view of a tracked cell needed to compute a difference vector. `position`
/// is the cell's latest center, which for occluded cells differs from the
/// frozen `features.centroid`.
struct TrackState {
    FeatureSet features;
    Vec2 position;
    std::optional<Vec2> prev_position;
};

FeatureSet extract_features(const Region& region);

/// Constant-velocity extrapolation: 2*prev - prev2.
Vec2 predict_center(const Vec2& prev, const Vec2& prev2);

/// Predicted center of a tracked cell; falls back to the current position when
/// only one centroid has been recorded.
Vec2 predicted_position(const TrackState& tracked);

DiffVector diff_vector(const FeatureSet& current, const TrackState& tracked);
TruncatedDiffVector truncate(const DiffVector& v);

}  // namespace celltrack
