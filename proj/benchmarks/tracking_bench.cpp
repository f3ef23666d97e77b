#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "celltrack/association.hpp"
#include "celltrack/dtree.hpp"
#include "celltrack/features.hpp"
#include "celltrack/hungarian.hpp"
#include "celltrack/segmentation.hpp"
#include "celltrack/synthdata.hpp"
#include "celltrack/tracker.hpp"

namespace {

using namespace celltrack;

SynthConfig bench_config() {
    SynthConfig config;
    config.frames = 80;
    config.n_cells = 8;
    config.seed = 7;
    return config;
}

const SequenceData& sequence() {
    static SequenceData data = generate_sequence(bench_config());
    return data;
}

const BackgroundModel& background() {
    static BackgroundModel bg = compute_background(sequence().frames, 20);
    return bg;
}

const std::vector<std::vector<Region>>& segmented() {
    static std::vector<std::vector<Region>> all = [] {
        std::vector<std::vector<Region>> out;
        SegmentationParams params;
        for (const GrayFrame& f : sequence().frames)
            out.push_back(segment_frame(f, background(), params));
        return out;
    }();
    return all;
}

const Region& sample_region() {
    static Region region = [] {
        Region best;
        for (const Region& r : segmented()[40])
            if (r.area() > best.area()) best = r;
        return best;
    }();
    return region;
}

struct TrainedTrees {
    DecisionTree t1;
    DecisionTree t2;
};

const TrainedTrees& trees() {
    static TrainedTrees t = [] {
        TrainingSet pairs =
            label_pairs(sequence().frames, sequence().truth, 1, SegmentationParams{}, 150.0);
        TrainConfig config;
        return TrainedTrees{train(pairs, config), train(truncate_pairs(pairs), config)};
    }();
    return t;
}

void BM_compute_background(benchmark::State& state) {
    std::vector<GrayFrame> window(sequence().frames.begin(), sequence().frames.begin() + 20);
    for (auto _ : state) benchmark::DoNotOptimize(compute_background(window, 20));
}
BENCHMARK(BM_compute_background)->Unit(benchmark::kMillisecond);

void BM_segment_frame(benchmark::State& state) {
    const GrayFrame& frame = sequence().frames[40];
    SegmentationParams params;
    for (auto _ : state) benchmark::DoNotOptimize(segment_frame(frame, background(), params));
}
BENCHMARK(BM_segment_frame)->Unit(benchmark::kMillisecond);

void BM_extract_features(benchmark::State& state) {
    const Region& region = sample_region();
    for (auto _ : state) benchmark::DoNotOptimize(extract_features(region));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_extract_features);

void BM_diff_vector(benchmark::State& state) {
    FeatureSet current = extract_features(sample_region());
    TrackedCell cell;
    cell.features = current;
    cell.position = current.centroid;
    cell.prev_position = Vec2{current.centroid.x - 4.0, current.centroid.y + 2.0};
    TrackState tracked = track_state(cell);
    for (auto _ : state) benchmark::DoNotOptimize(diff_vector(current, tracked));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_diff_vector);

void BM_classify(benchmark::State& state) {
    const DecisionTree& tree = trees().t1;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(0.0, 30.0);
    std::vector<std::vector<double>> probes(256, std::vector<double>(23));
    for (auto& p : probes)
        for (double& v : p) v = value(rng);
    for (auto _ : state)
        for (const auto& p : probes) benchmark::DoNotOptimize(tree.classify(p));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(probes.size()));
}
BENCHMARK(BM_classify);

void BM_train_depth8(benchmark::State& state) {
    static TrainingSet pairs =
        label_pairs(sequence().frames, sequence().truth, 1, SegmentationParams{}, 150.0);
    TrainConfig config;
    for (auto _ : state) benchmark::DoNotOptimize(train(pairs, config));
    state.SetLabel(std::to_string(pairs.size()) + " rows");
}
BENCHMARK(BM_train_depth8)->Unit(benchmark::kMillisecond);

void BM_solve_max_assignment(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    std::vector<std::vector<double>> matrix(n, std::vector<double>(n));
    for (auto& row : matrix)
        for (double& v : row) v = value(rng);
    for (auto _ : state) benchmark::DoNotOptimize(solve_max_assignment(matrix));
}
BENCHMARK(BM_solve_max_assignment)->Arg(8)->Arg(16)->Arg(32);

void BM_modified_hungarian(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    AssociationMatrix matrix(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) matrix.at(r, c) = value(rng);
        matrix.at(r, matrix.new_col()) = 0.1 * value(rng);
        matrix.at(r, matrix.occl_col()) = 0.1 * value(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(modified_hungarian(matrix));
}
BENCHMARK(BM_modified_hungarian)->Arg(8)->Arg(16);

void BM_tracker_sequence(benchmark::State& state) {
    const auto& regions = segmented();
    const TrainedTrees& t = trees();
    SynthConfig config = bench_config();
    for (auto _ : state) {
        Tracker tracker(t.t1, t.t2, TrackerParams{}, config.width, config.height);
        for (int f = 0; f < static_cast<int>(regions.size()); ++f)
            tracker.process_frame(regions[f], f);
        benchmark::DoNotOptimize(tracker.rows());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(regions.size()));
}
BENCHMARK(BM_tracker_sequence)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
