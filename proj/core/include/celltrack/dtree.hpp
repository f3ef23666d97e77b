#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace celltrack {

struct TrainConfig {
    int max_depth = 8;
    int subdivisions = 1000;  // candidate thresholds per feature, at uniform quantiles
    int stop_size = 20;       // stop splitting when a subset is this small or smaller
    double stop_entropy = 0.0;
};

struct TrainingRow {
    std::vector<double> values;
    int label = 0;  // 0 or 1
};

struct TrainingSet {
    std::vector<TrainingRow> rows;

    int dimension() const { return rows.empty() ? 0 : static_cast<int>(rows.front().values.size()); }
    std::size_t size() const { return rows.size(); }
};

/// Either a split (feature/threshold/children) or a leaf (probability/support).
/// Feature indices are 0-based in memory; the model file writes them 1-based to
/// match the v1..v23 column naming of pairs files.
struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double probability = 0.0;
    int support = 0;

    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    int dimension = 0;
    TrainConfig config;
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    bool trained() const { return !nodes.empty(); }
    /// Leaf probability P_T(v); descends left on v[k] <= threshold.
    double classify(std::span<const double> v) const;
    bool structurally_equal(const DecisionTree& o) const;
};

struct SplitChoice {
    int feature = -1;      // 0-based
    double threshold = 0.0;
    double gain = 0.0;
};

/// Shannon entropy (base 2) of the label distribution.
double entropy(const TrainingSet& dataset);
double entropy_from_counts(std::int64_t positives, std::int64_t total);

/// Best (feature, threshold) by entropy reduction over quantile-placed candidates.
/// Ties break toward the smallest feature index, then the smallest threshold.
/// Returns nullopt when no candidate yields two non-empty subsets.
std::optional<SplitChoice> best_split(const TrainingSet& dataset, const TrainConfig& config);

DecisionTree train(const TrainingSet& dataset, const TrainConfig& config);

/// Versioned text model format; round-trips trees exactly.
void save_model(const DecisionTree& tree, const std::filesystem::path& path);
DecisionTree load_model(const std::filesystem::path& path);
std::string serialize_model(const DecisionTree& tree);
DecisionTree deserialize_model(const std::string& text);

/// Labeled-pair dataset: delimited text, feature columns then label y in {0,1}.
/// 23-wide sets are headed v1..v23,y and 21-wide sets v3..v23,y.
void save_pairs(const TrainingSet& dataset, const std::filesystem::path& path);
TrainingSet load_pairs(const std::filesystem::path& path);

/// Fraction of rows misclassified at the P_T > 0.5 decision rule.
double misclassification(const DecisionTree& tree, const TrainingSet& dataset);

/// Repeated random 70/30 split protocol: mean test misclassification per depth.
struct ProtocolResult {
    std::vector<int> depths;
    std::vector<double> mean_test_error;  // aligned with depths
    int runs = 0;
    std::string to_text() const;
};
ProtocolResult evaluate_protocol(const TrainingSet& dataset, const TrainConfig& config,
                                 const std::vector<int>& depths, int runs, std::uint64_t seed);

}  // namespace celltrack
