#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <vector>

#include "celltrack/dtree.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace celltrack;

namespace {

TrainingSet make_set(const std::vector<std::vector<double>>& values,
                     const std::vector<int>& labels) {
    TrainingSet set;
    for (std::size_t i = 0; i < values.size(); ++i)
        set.rows.push_back({values[i], labels[i]});
    return set;
}

TrainingSet random_set(std::mt19937_64& rng, int max_rows, int max_features) {
    std::uniform_int_distribution<int> rows(2, max_rows);
    std::uniform_int_distribution<int> feats(1, max_features);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> small(0, 9);
    std::uniform_real_distribution<double> real(-5.0, 5.0);

    const int n = rows(rng);
    const int d = feats(rng);
    TrainingSet set;
    for (int i = 0; i < n; ++i) {
        TrainingRow row;
        row.label = coin(rng);
        for (int k = 0; k < d; ++k)
            // mix of heavily tied integer grids and continuous values
            row.values.push_back(coin(rng) ? static_cast<double>(small(rng)) : real(rng));
        set.rows.push_back(std::move(row));
    }
    return set;
}

bool has_positive_entropy(const TrainingSet& set) {
    int pos = 0;
    for (const auto& r : set.rows) pos += r.label;
    return pos != 0 && pos != static_cast<int>(set.rows.size());
}

DecisionTree random_tree(std::mt19937_64& rng, int dimension, int max_depth) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> thr(-100.0, 100.0);
    std::uniform_int_distribution<int> feat(0, dimension - 1);
    std::uniform_int_distribution<int> support(1, 5000);

    DecisionTree tree;
    tree.dimension = dimension;
    auto build = [&](auto&& self, int depth) -> int {
        const int at = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (depth >= max_depth || unit(rng) < 0.3) {
            tree.nodes[at].is_leaf = true;
            tree.nodes[at].probability = unit(rng);
            tree.nodes[at].support = support(rng);
        } else {
            tree.nodes[at].is_leaf = false;
            tree.nodes[at].feature = feat(rng);
            tree.nodes[at].threshold = thr(rng);
            tree.nodes[at].left = self(self, depth + 1);
            tree.nodes[at].right = self(self, depth + 1);
        }
        return at;
    };
    build(build, 0);
    return tree;
}

}  // namespace

TEST_CASE("entropy of labeled sets") {
    CHECK(entropy(make_set({{1}, {2}}, {1, 1})) == 0.0);
    CHECK(entropy(make_set({{1}, {2}}, {0, 0})) == 0.0);
    CHECK(entropy(make_set({{1}, {2}, {3}, {4}}, {1, 1, 0, 0})) == doctest::Approx(1.0));
    CHECK(entropy(make_set({{1}, {2}, {3}, {4}}, {1, 0, 0, 0})) ==
          doctest::Approx(-0.25 * std::log2(0.25) - 0.75 * std::log2(0.75)));
    CHECK_THROWS_AS(entropy(TrainingSet{}), std::invalid_argument);
    CHECK_THROWS_AS(entropy_from_counts(0, 0), std::invalid_argument);
}

TEST_CASE("a perfectly separating feature earns the full parent entropy") {
    const TrainingSet set = make_set({{1.0}, {4.0}, {5.0}, {7.0}, {9.0}, {12.0}},
                                     {1, 1, 1, 0, 0, 0});
    const auto split = best_split(set, TrainConfig{});
    REQUIRE(split.has_value());
    CHECK(split->feature == 0);
    CHECK(split->gain == doctest::Approx(entropy(set)));
    CHECK(split->threshold >= 5.0);
    CHECK(split->threshold < 7.0);
}

TEST_CASE("best_split refuses a pure dataset") {
    CHECK_THROWS_AS(best_split(make_set({{1}, {2}}, {1, 1}), TrainConfig{}),
                    std::invalid_argument);
}

TEST_CASE("best_split matches exhaustive midpoint search on a small dataset") {
    const TrainingSet set =
        make_set({{2.0, 7.0}, {3.0, 1.0}, {8.0, 6.0}, {9.0, 2.0}}, {1, 0, 1, 0});
    const auto split = best_split(set, TrainConfig{});
    REQUIRE(split.has_value());
    CHECK(split->gain == doctest::Approx(oracles::exhaustive_best_gain(set)).epsilon(1e-12));
}

TEST_CASE("best_split gain equals the exhaustive optimum on random datasets") {
    std::mt19937_64 rng(401);
    int checked = 0;
    while (checked < 60) {
        const TrainingSet set = random_set(rng, 40, 4);
        if (!has_positive_entropy(set)) continue;
        ++checked;
        const auto split = best_split(set, TrainConfig{});
        const double want = oracles::exhaustive_best_gain(set);
        if (want < 0.0) {
            // all features constant: no candidate can split
            CHECK(!split.has_value());
            continue;
        }
        REQUIRE(split.has_value());
        CHECK(split->gain >= 0.0);
        CHECK(std::abs(split->gain - want) <= 1e-12);
    }
}

TEST_CASE("training a pure-positive dataset yields one full-confidence leaf") {
    const DecisionTree tree = train(make_set({{1}, {2}, {3}}, {1, 1, 1}), TrainConfig{});
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf);
    CHECK(tree.nodes[0].probability == doctest::Approx(1.0));
    CHECK(tree.classify(std::vector<double>{42.0}) == doctest::Approx(1.0));
}

TEST_CASE("a separable one-feature dataset needs a single split at depth 1") {
    TrainConfig cfg;
    cfg.max_depth = 1;
    cfg.stop_size = 1;
    const DecisionTree tree =
        train(make_set({{1.0}, {2.0}, {8.0}, {9.0}}, {1, 1, 0, 0}), cfg);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(!tree.nodes[0].is_leaf);
    const double left = tree.nodes[tree.nodes[0].left].probability;
    const double right = tree.nodes[tree.nodes[0].right].probability;
    CHECK(left == doctest::Approx(1.0));
    CHECK(right == doctest::Approx(0.0));
}

TEST_CASE("deeper trees never lose on training data") {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> real(0.0, 10.0);
    TrainingSet set;
    for (int i = 0; i < 200; ++i) {
        TrainingRow row;
        row.values = {real(rng), real(rng)};
        // noisy threshold rule
        row.label = (row.values[0] + 0.3 * real(rng) > 6.0) ? 1 : 0;
        set.rows.push_back(std::move(row));
    }
    TrainConfig deep;
    deep.max_depth = 8;
    deep.stop_size = 20;
    TrainConfig shallow = deep;
    shallow.max_depth = 1;
    CHECK(misclassification(train(set, deep), set) <=
          misclassification(train(set, shallow), set));
}

TEST_CASE("classify follows thresholds with ties going left") {
    DecisionTree tree;
    tree.dimension = 2;
    SUBCASE("single leaf returns its probability for any vector") {
        tree.nodes = {TreeNode{true, 0, 0.0, -1, -1, 0.9, 10}};
        CHECK(tree.classify(std::vector<double>{1.0, 2.0}) == doctest::Approx(0.9));
    }
    SUBCASE("boundary value takes the left branch") {
        tree.nodes = {TreeNode{false, 0, 5.0, 1, 2, 0.0, 0},
                      TreeNode{true, 0, 0.0, -1, -1, 0.1, 5},
                      TreeNode{true, 0, 0.0, -1, -1, 0.8, 5}};
        CHECK(tree.classify(std::vector<double>{5.0, 99.0}) == doctest::Approx(0.1));
        CHECK(tree.classify(std::vector<double>{5.0001, 99.0}) == doctest::Approx(0.8));
    }
    SUBCASE("dimension mismatch is rejected") {
        tree.nodes = {TreeNode{true, 0, 0.0, -1, -1, 0.5, 1}};
        CHECK_THROWS_AS(tree.classify(std::vector<double>{1.0}), std::invalid_argument);
    }
    SUBCASE("untrained tree is rejected") {
        CHECK_THROWS_AS(DecisionTree{}.classify(std::vector<double>{}), std::logic_error);
    }
}

TEST_CASE("classify replays the training partition") {
    // one row per leaf: every training row must classify to its own label
    TrainingSet set;
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> real(0.0, 100.0);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int i = 0; i < 32; ++i)
        set.rows.push_back({{real(rng), real(rng)}, coin(rng)});
    TrainConfig cfg;
    cfg.max_depth = 32;
    cfg.stop_size = 1;
    const DecisionTree tree = train(set, cfg);
    for (const auto& row : set.rows)
        CHECK(tree.classify(row.values) == doctest::Approx(static_cast<double>(row.label)));
}

TEST_CASE("training replay never increases weighted entropy and shrinks supports") {
    std::mt19937_64 rng(613);
    for (int trial = 0; trial < 10; ++trial) {
        TrainingSet set = random_set(rng, 50, 3);
        if (!has_positive_entropy(set)) continue;
        TrainConfig cfg;
        cfg.max_depth = 6;
        cfg.stop_size = 2;
        const DecisionTree tree = train(set, cfg);

        // push every row down the tree, counting (n, pos) per node
        std::vector<std::int64_t> n(tree.nodes.size(), 0), pos(tree.nodes.size(), 0);
        for (const auto& row : set.rows) {
            int at = 0;
            for (;;) {
                ++n[at];
                pos[at] += row.label;
                if (tree.nodes[at].is_leaf) break;
                at = row.values[tree.nodes[at].feature] <= tree.nodes[at].threshold
                         ? tree.nodes[at].left
                         : tree.nodes[at].right;
            }
        }
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const TreeNode& node = tree.nodes[i];
            if (node.is_leaf) {
                CHECK(n[i] == node.support);
                CHECK(static_cast<double>(pos[i]) / n[i] == doctest::Approx(node.probability));
                continue;
            }
            // children partition the parent and strictly shrink
            CHECK(n[node.left] + n[node.right] == n[i]);
            CHECK(n[node.left] > 0);
            CHECK(n[node.right] > 0);
            const double parent = entropy_from_counts(pos[i], n[i]);
            const double child =
                (static_cast<double>(n[node.left]) / n[i]) *
                    entropy_from_counts(pos[node.left], n[node.left]) +
                (static_cast<double>(n[node.right]) / n[i]) *
                    entropy_from_counts(pos[node.right], n[node.right]);
            CHECK(child <= parent + 1e-12);
        }
    }
}

TEST_CASE("row order does not change the trained tree") {
    std::mt19937_64 rng(733);
    TrainingSet set = random_set(rng, 50, 3);
    while (!has_positive_entropy(set)) set = random_set(rng, 50, 3);
    TrainConfig cfg;
    cfg.max_depth = 5;
    cfg.stop_size = 2;
    const DecisionTree reference = train(set, cfg);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(set.rows.begin(), set.rows.end(), rng);
        CHECK(train(set, cfg).structurally_equal(reference));
    }
}

TEST_CASE("a shatterable dataset trains to zero error") {
    std::mt19937_64 rng(359);
    std::uniform_int_distribution<int> coin(0, 1);
    TrainingSet set;
    for (int i = 0; i < 64; ++i) set.rows.push_back({{static_cast<double>(i)}, coin(rng)});
    TrainConfig cfg;
    cfg.max_depth = 64;
    cfg.stop_size = 1;
    CHECK(misclassification(train(set, cfg), set) == 0.0);
}

TEST_CASE("model text round-trips exactly") {
    SUBCASE("single leaf") {
        DecisionTree tree;
        tree.dimension = 23;
        tree.nodes = {TreeNode{true, -1, 0.0, -1, -1, 0.625, 40}};
        const DecisionTree back = deserialize_model(serialize_model(tree));
        CHECK(back.structurally_equal(tree));
    }
    SUBCASE("random deep trees, bit-exact probabilities") {
        std::mt19937_64 rng(919);
        for (int trial = 0; trial < 25; ++trial) {
            const DecisionTree tree = random_tree(rng, 21, 8);
            const DecisionTree back = deserialize_model(serialize_model(tree));
            REQUIRE(back.structurally_equal(tree));
            std::uniform_real_distribution<double> val(-200.0, 200.0);
            std::vector<double> v(21);
            for (int probe = 0; probe < 20; ++probe) {
                for (auto& x : v) x = val(rng);
                CHECK(tree.classify(v) == back.classify(v));
            }
        }
    }
}

TEST_CASE("model files survive disk round-trips and reject damage") {
    std::mt19937_64 rng(1021);
    const DecisionTree tree = random_tree(rng, 23, 6);
    const auto path = std::filesystem::temp_directory_path() / "celltrack_model_test.t1";
    save_model(tree, path);
    CHECK(load_model(path).structurally_equal(tree));

    const std::string text = serialize_model(tree);
    CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), std::runtime_error);
    CHECK_THROWS_AS(deserialize_model(text + "L 0.5 3"), std::runtime_error);
    CHECK_THROWS_AS(deserialize_model("junk"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("pairs files round-trip both widths and validate labels") {
    const auto path = std::filesystem::temp_directory_path() / "celltrack_pairs_test.csv";
    std::mt19937_64 rng(1123);
    std::uniform_real_distribution<double> val(0.0, 1e4);

    for (int dim : {23, 21}) {
        TrainingSet set;
        for (int i = 0; i < 10; ++i) {
            TrainingRow row;
            row.label = i % 2;
            for (int k = 0; k < dim; ++k) row.values.push_back(val(rng));
            set.rows.push_back(std::move(row));
        }
        save_pairs(set, path);
        const TrainingSet back = load_pairs(path);
        REQUIRE(back.rows.size() == set.rows.size());
        CHECK(back.dimension() == dim);
        for (std::size_t i = 0; i < set.rows.size(); ++i) {
            CHECK(back.rows[i].label == set.rows[i].label);
            for (int k = 0; k < dim; ++k)
                CHECK(back.rows[i].values[k] == set.rows[i].values[k]);
        }
    }

    {
        std::FILE* f = std::fopen(path.string().c_str(), "wb");
        std::fputs("v1,v2,y\n0.5,0.25,2\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_pairs(path), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("protocol evaluation is deterministic and reports every depth") {
    std::mt19937_64 rng(1217);
    std::uniform_real_distribution<double> real(0.0, 10.0);
    TrainingSet set;
    for (int i = 0; i < 120; ++i) {
        TrainingRow row;
        row.values = {real(rng), real(rng)};
        row.label = row.values[0] > 5.0 ? 1 : 0;
        set.rows.push_back(std::move(row));
    }
    const std::vector<int> depths{1, 3, 5};
    const ProtocolResult a = evaluate_protocol(set, TrainConfig{}, depths, 5, 77);
    const ProtocolResult b = evaluate_protocol(set, TrainConfig{}, depths, 5, 77);
    CHECK(a.to_text() == b.to_text());
    CHECK(a.depths == depths);
    REQUIRE(a.mean_test_error.size() == 3);
    for (double e : a.mean_test_error) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}
