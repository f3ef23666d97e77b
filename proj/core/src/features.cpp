#include "celltrack/features.hpp"

#include <cmath>
#include <stdexcept>

namespace celltrack {

namespace {

double signed_root(double moment, int order) {
    if (order % 2 == 0) return std::pow(moment, 1.0 / order);
    return std::copysign(std::pow(std::abs(moment), 1.0 / order), moment);
}

}  // namespace

FeatureSet extract_features(const Region& region) {
    if (region.pixels.empty()) throw std::invalid_argument("extract_features: empty region");

    FeatureSet f;
    const auto& px = region.pixels;
    const double n = static_cast<double>(px.size());
    f.area = region.area();
    f.centroid = region.centroid();

    double sum_i = 0.0;
    for (const auto& p : px) sum_i += p.intensity;
    f.mean = sum_i / n;

    double ss = 0.0;
    for (const auto& p : px) {
        double d = p.intensity - f.mean;
        ss += d * d;
    }
    f.stddev = std::sqrt(ss) / n;

    if (f.stddev > 0.0) {
        double s3 = 0.0, s4 = 0.0;
        for (const auto& p : px) {
            double z = (p.intensity - f.mean) / f.stddev;
            double z2 = z * z;
            s3 += z2 * z;
            s4 += z2 * z2;
        }
        f.skewness = s3 / n;
        f.kurtosis = s4 / n;
        for (std::size_t k = 0; k < kMomentOrders.size(); ++k) {
            double m = 0.0;
            for (const auto& p : px)
                m += std::pow(static_cast<double>(p.intensity) - f.mean, kMomentOrders[k]);
            f.central_moment_roots[k] = signed_root(m / n, kMomentOrders[k]);
        }
    }
    // sigma == 0 leaves skewness, kurtosis and the moment roots at 0.

    for (std::size_t k = 0; k < kInertiaOrders.size(); ++k) {
        const double order = kInertiaOrders[k];
        const double norm = std::pow(n, 1.0 + order / 2.0);
        double sj = 0.0, sp = 0.0;
        for (const auto& p : px) {
            double r = std::hypot(p.x - f.centroid.x, p.y - f.centroid.y);
            double rn = std::pow(r, order);
            sj += rn;
            sp += rn * p.intensity;
        }
        f.inertias[k] = sj / norm;
        f.poly_features[k] = sp / norm;
    }

    for (std::size_t k = 0; k < kGaussOrders.size(); ++k) {
        const double denom = 2.0 * kGaussOrders[k] * kGaussOrders[k];
        double sg = 0.0;
        for (const auto& p : px) {
            double dx = p.x - f.centroid.x, dy = p.y - f.centroid.y;
            sg += std::exp(-(dx * dx + dy * dy) / denom) * p.intensity;
        }
        f.gauss_features[k] = sg / n;
    }
    return f;
}

Vec2 predict_center(const Vec2& prev, const Vec2& prev2) {
    return prev * 2.0 - prev2;
}

Vec2 predicted_position(const TrackState& tracked) {
    if (tracked.prev_position) return predict_center(tracked.position, *tracked.prev_position);
    return tracked.position;
}

DiffVector diff_vector(const FeatureSet& current, const TrackState& tracked) {
    const FeatureSet& c = current;
    const FeatureSet& l = tracked.features;
    DiffVector out;
    auto& v = out.v;
    // Without two recorded positions there is no velocity estimate; a raw
    // displacement here would dwarf the prediction errors seen elsewhere, so
    // the entry is neutralized instead.
    v[0] = tracked.prev_position
               ? distance(c.centroid, predicted_position(tracked))
               : 0.0;
    v[1] = distance(c.centroid, tracked.position);
    v[2] = std::abs(static_cast<double>(c.area - l.area));
    v[3] = std::abs(c.mean - l.mean);
    v[4] = std::abs(c.stddev - l.stddev);
    v[5] = std::abs(c.skewness - l.skewness);
    v[6] = std::abs(c.kurtosis - l.kurtosis);
    for (std::size_t k = 0; k < 4; ++k) {
        v[7 + k] = std::abs(c.central_moment_roots[k] - l.central_moment_roots[k]);
        v[11 + k] = std::abs(c.inertias[k] - l.inertias[k]);
        v[15 + k] = std::abs(c.poly_features[k] - l.poly_features[k]);
        v[19 + k] = std::abs(c.gauss_features[k] - l.gauss_features[k]);
    }
    return out;
}

TruncatedDiffVector truncate(const DiffVector& v) {
    TruncatedDiffVector out;
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] = v.v[k + 2];
    return out;
}

}  // namespace celltrack
