#include <cmath>
#include <random>

#include "celltrack/features.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace celltrack;

namespace {

Region region_from(std::initializer_list<RegionPixel> pixels) {
    Region r;
    r.pixels = pixels;
    return r;
}

void check_matches_oracle(const FeatureSet& got, const FeatureSet& want) {
    const double tol = 1e-9;
    CHECK(got.area == want.area);
    CHECK(oracles::close_rel(got.centroid.x, want.centroid.x, tol));
    CHECK(oracles::close_rel(got.centroid.y, want.centroid.y, tol));
    CHECK(oracles::close_rel(got.mean, want.mean, tol));
    CHECK(oracles::close_rel(got.stddev, want.stddev, tol));
    CHECK(oracles::close_rel(got.skewness, want.skewness, tol));
    CHECK(oracles::close_rel(got.kurtosis, want.kurtosis, tol));
    for (int k = 0; k < 4; ++k) {
        CHECK(oracles::close_rel(got.central_moment_roots[k], want.central_moment_roots[k], tol));
        CHECK(oracles::close_rel(got.inertias[k], want.inertias[k], tol));
        CHECK(oracles::close_rel(got.poly_features[k], want.poly_features[k], tol));
        CHECK(oracles::close_rel(got.gauss_features[k], want.gauss_features[k], tol));
    }
}

}  // namespace

TEST_CASE("single pixel has zero spread and pure intensity features") {
    const FeatureSet f = extract_features(region_from({{7, 3, 100}}));
    CHECK(f.area == 1);
    CHECK(f.centroid.x == doctest::Approx(7.0));
    CHECK(f.centroid.y == doctest::Approx(3.0));
    CHECK(f.mean == doctest::Approx(100.0));
    CHECK(f.stddev == 0.0);
    for (int k = 0; k < 4; ++k) {
        CHECK(f.inertias[k] == 0.0);
        CHECK(f.poly_features[k] == 0.0);
        CHECK(f.gauss_features[k] == doctest::Approx(100.0));
    }
}

TEST_CASE("two-pixel region matches a hand evaluation") {
    const FeatureSet f = extract_features(region_from({{0, 0, 10}, {1, 0, 20}}));
    CHECK(f.centroid.x == doctest::Approx(0.5));
    CHECK(f.centroid.y == doctest::Approx(0.0));
    CHECK(f.mean == doctest::Approx(15.0));
    CHECK(f.stddev == doctest::Approx(std::sqrt(50.0) / 2.0));
    CHECK(f.inertias[0] == doctest::Approx(1.0 / std::pow(2.0, 1.5)));
}

TEST_CASE("constant-intensity region zeroes the normalized moments") {
    const FeatureSet f =
        extract_features(region_from({{0, 0, 55}, {1, 0, 55}, {0, 1, 55}, {1, 1, 55}}));
    CHECK(f.stddev == 0.0);
    CHECK(f.skewness == 0.0);
    CHECK(f.kurtosis == 0.0);
    for (int k = 0; k < 4; ++k) CHECK(f.central_moment_roots[k] == 0.0);
}

TEST_CASE("features match the naive oracle on random regions") {
    std::mt19937_64 rng(107);
    for (int trial = 0; trial < 200; ++trial) {
        const Region r = oracles::random_region(rng, 30);
        check_matches_oracle(extract_features(r), oracles::naive_features(r));
    }
}

TEST_CASE("integer translation changes only the centroid") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Region r = oracles::random_region(rng, 25);
        Region shifted = r;
        for (auto& p : shifted.pixels) {
            p.x += 17;
            p.y -= 9;
        }
        const FeatureSet a = extract_features(r);
        const FeatureSet b = extract_features(shifted);
        CHECK(b.centroid.x == doctest::Approx(a.centroid.x + 17).epsilon(1e-12));
        CHECK(b.centroid.y == doctest::Approx(a.centroid.y - 9).epsilon(1e-12));
        CHECK(b.mean == a.mean);
        CHECK(b.stddev == a.stddev);
        CHECK(b.skewness == a.skewness);
        CHECK(b.kurtosis == a.kurtosis);
        for (int k = 0; k < 4; ++k) {
            CHECK(b.central_moment_roots[k] == a.central_moment_roots[k]);
            CHECK(b.inertias[k] == doctest::Approx(a.inertias[k]).epsilon(1e-9));
            CHECK(b.poly_features[k] == doctest::Approx(a.poly_features[k]).epsilon(1e-9));
            CHECK(b.gauss_features[k] == doctest::Approx(a.gauss_features[k]).epsilon(1e-9));
        }
    }
}

TEST_CASE("constant intensity shift moves the mean and nothing else normalized") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        Region r = oracles::random_region(rng, 25);
        for (auto& p : r.pixels) p.intensity = static_cast<std::uint8_t>(p.intensity % 200);
        Region shifted = r;
        for (auto& p : shifted.pixels) p.intensity = static_cast<std::uint8_t>(p.intensity + 50);
        const FeatureSet a = extract_features(r);
        const FeatureSet b = extract_features(shifted);
        CHECK(b.mean == doctest::Approx(a.mean + 50.0).epsilon(1e-12));
        CHECK(b.stddev == doctest::Approx(a.stddev).epsilon(1e-12));
        CHECK(b.skewness == doctest::Approx(a.skewness).epsilon(1e-9));
        CHECK(b.kurtosis == doctest::Approx(a.kurtosis).epsilon(1e-9));
        for (int k = 0; k < 4; ++k) {
            CHECK(b.central_moment_roots[k] ==
                  doctest::Approx(a.central_moment_roots[k]).epsilon(1e-9));
            CHECK(b.inertias[k] == doctest::Approx(a.inertias[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("predict_center extrapolates at constant velocity") {
    Vec2 p = predict_center({12, 14}, {10, 10});
    CHECK(p.x == doctest::Approx(14.0));
    CHECK(p.y == doctest::Approx(18.0));

    p = predict_center({5, 5}, {5, 5});
    CHECK(p.x == doctest::Approx(5.0));
    CHECK(p.y == doctest::Approx(5.0));

    // may land outside any image; that is fine, distances stay defined
    p = predict_center({0, 0}, {3, 4});
    CHECK(p.x == doctest::Approx(-3.0));
    CHECK(p.y == doctest::Approx(-4.0));
}

TEST_CASE("predicted_position falls back to the current position without history") {
    TrackState t;
    t.position = {8, 9};
    const Vec2 p = predicted_position(t);
    CHECK(p.x == doctest::Approx(8.0));
    CHECK(p.y == doctest::Approx(9.0));

    t.prev_position = Vec2{6, 5};
    const Vec2 q = predicted_position(t);
    CHECK(q.x == doctest::Approx(10.0));
    CHECK(q.y == doctest::Approx(13.0));
}

TEST_CASE("difference of a cell with itself is the zero vector") {
    const Region r = region_from({{4, 4, 120}, {5, 4, 130}, {4, 5, 140}});
    const FeatureSet f = extract_features(r);
    TrackState t;
    t.features = f;
    t.position = f.centroid;
    t.prev_position = f.centroid;
    const DiffVector d = diff_vector(f, t);
    for (double v : d.v) CHECK(v == 0.0);
}

TEST_CASE("position entries combine prediction with raw displacement") {
    FeatureSet current;
    current.centroid = {14, 18};
    TrackState t;
    t.features = current;
    t.position = {12, 14};
    t.prev_position = Vec2{10, 10};
    const DiffVector d = diff_vector(current, t);
    CHECK(d.v[0] == doctest::Approx(0.0));
    CHECK(d.v[1] == doctest::Approx(std::sqrt(20.0)));
}

TEST_CASE("position prediction is neutral without two recorded centers") {
    FeatureSet current;
    current.centroid = {30, 40};
    TrackState t;
    t.features = current;
    t.position = {10, 10};
    const DiffVector d = diff_vector(current, t);
    CHECK(d.v[0] == 0.0);
    CHECK(d.v[1] == doctest::Approx(std::sqrt(400.0 + 900.0)));
}

TEST_CASE("area difference lands in the third entry") {
    FeatureSet a, b;
    a.area = 200;
    b.area = 150;
    TrackState t;
    t.features = b;
    const DiffVector d = diff_vector(a, t);
    CHECK(d.v[2] == doctest::Approx(50.0));
}

TEST_CASE("all entries beyond the first are symmetric in the two cells") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const Region ra = oracles::random_region(rng, 20);
        const Region rb = oracles::random_region(rng, 20);
        const FeatureSet fa = extract_features(ra);
        const FeatureSet fb = extract_features(rb);

        // synchronized histories: both tracks stationary at their centroids
        TrackState ta{fa, fa.centroid, fa.centroid};
        TrackState tb{fb, fb.centroid, fb.centroid};
        const DiffVector ab = diff_vector(fa, tb);
        const DiffVector ba = diff_vector(fb, ta);
        for (int k = 1; k < 23; ++k) CHECK(ab.v[k] == doctest::Approx(ba.v[k]).epsilon(1e-12));
    }
}

TEST_CASE("feature values are finite and distance features nonnegative") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const FeatureSet f = extract_features(oracles::random_region(rng, 30));
        CHECK(std::isfinite(f.mean));
        CHECK(std::isfinite(f.skewness));
        CHECK(std::isfinite(f.kurtosis));
        CHECK(f.stddev >= 0.0);
        for (int k = 0; k < 4; ++k) {
            CHECK(f.inertias[k] >= 0.0);
            CHECK(f.poly_features[k] >= 0.0);
            CHECK(f.gauss_features[k] >= 0.0);
            CHECK(std::isfinite(f.central_moment_roots[k]));
        }
    }
}

TEST_CASE("truncate drops the two position entries") {
    DiffVector d;
    SUBCASE("zero stays zero") {
        const TruncatedDiffVector t = truncate(d);
        CHECK(t.v.size() == 21);
        for (double v : t.v) CHECK(v == 0.0);
    }
    SUBCASE("remaining entries shift down by two") {
        d.v[0] = 7;
        d.v[1] = 3;
        d.v[2] = 1;
        for (int k = 3; k < 23; ++k) d.v[k] = 100.0 + k;
        const TruncatedDiffVector t = truncate(d);
        CHECK(t.v[0] == doctest::Approx(1.0));
        for (int k = 1; k < 21; ++k) CHECK(t.v[k] == doctest::Approx(100.0 + k + 2));
    }
}
