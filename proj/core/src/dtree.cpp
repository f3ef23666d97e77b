#include "celltrack/dtree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace celltrack {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw std::runtime_error(std::string("model: bad ") + what + " '" + tok + "'");
    return v;
}

}  // namespace

double entropy_from_counts(std::int64_t positives, std::int64_t total) {
    if (total <= 0) throw std::invalid_argument("entropy: empty dataset");
    if (positives == 0 || positives == total) return 0.0;
    double p = static_cast<double>(positives) / static_cast<double>(total);
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double entropy(const TrainingSet& dataset) {
    if (dataset.rows.empty()) throw std::invalid_argument("entropy: empty dataset");
    std::int64_t pos = 0;
    for (const auto& r : dataset.rows) pos += r.label;
    return entropy_from_counts(pos, static_cast<std::int64_t>(dataset.rows.size()));
}

namespace {

// Split search over a subset given by row indices. Candidate thresholds sit at
// uniform quantiles (linear interpolation between order statistics) of the
// subset's observed values per feature.
std::optional<SplitChoice> best_split_indices(const TrainingSet& dataset,
                                              const std::vector<int>& idx,
                                              const TrainConfig& config) {
    const std::int64_t n = static_cast<std::int64_t>(idx.size());
    std::int64_t pos = 0;
    for (int i : idx) pos += dataset.rows[i].label;
    const double parent_entropy = entropy_from_counts(pos, n);

    const int dim = dataset.dimension();
    std::optional<SplitChoice> best;

    std::vector<std::pair<double, int>> sorted(n);  // (value, label)
    std::vector<std::int64_t> prefix_pos(n + 1);

    for (int k = 0; k < dim; ++k) {
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& row = dataset.rows[idx[i]];
            sorted[i] = {row.values[k], row.label};
        }
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (sorted.front().first == sorted.back().first) continue;  // constant feature
        prefix_pos[0] = 0;
        for (std::int64_t i = 0; i < n; ++i) prefix_pos[i + 1] = prefix_pos[i] + sorted[i].second;

        double prev_tau = -std::numeric_limits<double>::infinity();
        for (int s = 1; s <= config.subdivisions; ++s) {
            const double q = static_cast<double>(s) / (config.subdivisions + 1);
            const double h = q * static_cast<double>(n - 1);
            const auto lo = static_cast<std::int64_t>(h);
            double tau = sorted[lo].first;
            if (lo + 1 < n) tau += (h - static_cast<double>(lo)) * (sorted[lo + 1].first - tau);
            if (tau == prev_tau) continue;
            prev_tau = tau;

            // left subset: values <= tau
            const auto first_right = std::upper_bound(
                sorted.begin(), sorted.end(), tau,
                [](double t, const auto& e) { return t < e.first; });
            const std::int64_t n_left = first_right - sorted.begin();
            if (n_left == 0 || n_left == n) continue;
            const std::int64_t pos_left = prefix_pos[n_left];
            double gain = parent_entropy -
                          (static_cast<double>(n_left) / n) * entropy_from_counts(pos_left, n_left) -
                          (static_cast<double>(n - n_left) / n) *
                              entropy_from_counts(pos - pos_left, n - n_left);
            gain = std::max(0.0, gain);
            if (!best || gain > best->gain) best = SplitChoice{k, tau, gain};
        }
    }
    return best;
}

struct TrainContext {
    const TrainingSet& dataset;
    const TrainConfig& config;
    std::vector<TreeNode>& nodes;
};

int build_node(TrainContext& ctx, std::vector<int>& idx, int depth) {
    const std::int64_t n = static_cast<std::int64_t>(idx.size());
    std::int64_t pos = 0;
    for (int i : idx) pos += ctx.dataset.rows[i].label;
    const double node_entropy = entropy_from_counts(pos, n);

    auto make_leaf = [&]() {
        TreeNode leaf;
        leaf.is_leaf = true;
        leaf.probability = static_cast<double>(pos) / static_cast<double>(n);
        leaf.support = static_cast<int>(n);
        ctx.nodes.push_back(leaf);
        return static_cast<int>(ctx.nodes.size()) - 1;
    };

    if (depth >= ctx.config.max_depth || n <= ctx.config.stop_size ||
        node_entropy <= ctx.config.stop_entropy)
        return make_leaf();

    auto split = best_split_indices(ctx.dataset, idx, ctx.config);
    if (!split) return make_leaf();

    std::vector<int> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (int i : idx)
        if (ctx.dataset.rows[i].values[split->feature] <= split->threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    const int self = static_cast<int>(ctx.nodes.size());
    TreeNode node;
    node.is_leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    ctx.nodes.push_back(node);
    ctx.nodes[self].left = build_node(ctx, left_idx, depth + 1);
    ctx.nodes[self].right = build_node(ctx, right_idx, depth + 1);
    return self;
}

}  // namespace

std::optional<SplitChoice> best_split(const TrainingSet& dataset, const TrainConfig& config) {
    if (dataset.rows.size() < 2) throw std::invalid_argument("best_split: need at least 2 rows");
    if (entropy(dataset) == 0.0) throw std::invalid_argument("best_split: zero entropy");
    if (config.subdivisions < 1) throw std::invalid_argument("best_split: subdivisions must be >= 1");
    std::vector<int> idx(dataset.rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return best_split_indices(dataset, idx, config);
}

DecisionTree train(const TrainingSet& dataset, const TrainConfig& config) {
    if (dataset.rows.empty()) throw std::invalid_argument("train: empty dataset");
    if (config.max_depth < 1 || config.subdivisions < 1 || config.stop_size < 1)
        throw std::invalid_argument("train: invalid config");
    for (const auto& r : dataset.rows)
        if (static_cast<int>(r.values.size()) != dataset.dimension())
            throw std::invalid_argument("train: inconsistent row dimensionality");

    DecisionTree tree;
    tree.dimension = dataset.dimension();
    tree.config = config;
    std::vector<int> idx(dataset.rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    TrainContext ctx{dataset, config, tree.nodes};
    build_node(ctx, idx, 0);
    return tree;
}

double DecisionTree::classify(std::span<const double> v) const {
    if (nodes.empty()) throw std::logic_error("classify: untrained tree");
    if (static_cast<int>(v.size()) != dimension)
        throw std::invalid_argument("classify: dimensionality mismatch");
    int at = 0;
    while (!nodes[at].is_leaf)
        at = v[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].probability;
}

bool DecisionTree::structurally_equal(const DecisionTree& o) const {
    return dimension == o.dimension && nodes == o.nodes;
}

namespace {

void write_node(const DecisionTree& tree, int at, std::ostream& out) {
    const TreeNode& n = tree.nodes[at];
    if (n.is_leaf) {
        out << "L " << format_double(n.probability) << " " << n.support << "\n";
    } else {
        out << "S " << (n.feature + 1) << " " << format_double(n.threshold) << "\n";
        write_node(tree, n.left, out);
        write_node(tree, n.right, out);
    }
}

int read_node(DecisionTree& tree, std::istream& in) {
    std::string tag;
    if (!(in >> tag)) throw std::runtime_error("model: truncated file");
    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (tag == "S") {
        std::string k_tok, tau_tok;
        if (!(in >> k_tok >> tau_tok)) throw std::runtime_error("model: truncated split node");
        int k = static_cast<int>(parse_double(k_tok, "feature index"));
        if (k < 1 || k > tree.dimension)
            throw std::runtime_error("model: feature index out of range");
        tree.nodes[self].is_leaf = false;
        tree.nodes[self].feature = k - 1;
        tree.nodes[self].threshold = parse_double(tau_tok, "threshold");
        tree.nodes[self].left = read_node(tree, in);
        tree.nodes[self].right = read_node(tree, in);
    } else if (tag == "L") {
        std::string p_tok, n_tok;
        if (!(in >> p_tok >> n_tok)) throw std::runtime_error("model: truncated leaf node");
        tree.nodes[self].is_leaf = true;
        tree.nodes[self].probability = parse_double(p_tok, "probability");
        tree.nodes[self].support = static_cast<int>(parse_double(n_tok, "support"));
        if (tree.nodes[self].probability < 0.0 || tree.nodes[self].probability > 1.0 ||
            tree.nodes[self].support < 1)
            throw std::runtime_error("model: invalid leaf");
    } else {
        throw std::runtime_error("model: unknown node tag '" + tag + "'");
    }
    return self;
}

constexpr const char* kModelMagic = "celltrack-dtree";
constexpr int kModelVersion = 1;

}  // namespace

std::string serialize_model(const DecisionTree& tree) {
    if (!tree.trained()) throw std::logic_error("serialize: untrained tree");
    std::ostringstream out;
    out << kModelMagic << " v" << kModelVersion << "\n";
    out << "dim " << tree.dimension << " depth " << tree.config.max_depth << " subdivisions "
        << tree.config.subdivisions << " stop_size " << tree.config.stop_size << " stop_entropy "
        << format_double(tree.config.stop_entropy) << "\n";
    write_node(tree, 0, out);
    return out.str();
}

DecisionTree deserialize_model(const std::string& text) {
    std::istringstream in(text);
    std::string magic, version;
    if (!(in >> magic >> version) || magic != kModelMagic)
        throw std::runtime_error("model: not a celltrack-dtree file");
    if (version != "v" + std::to_string(kModelVersion))
        throw std::runtime_error("model: unsupported version " + version);

    DecisionTree tree;
    std::string key;
    std::string stop_entropy_tok;
    if (!(in >> key >> tree.dimension) || key != "dim")
        throw std::runtime_error("model: malformed header (dim)");
    if (!(in >> key >> tree.config.max_depth) || key != "depth")
        throw std::runtime_error("model: malformed header (depth)");
    if (!(in >> key >> tree.config.subdivisions) || key != "subdivisions")
        throw std::runtime_error("model: malformed header (subdivisions)");
    if (!(in >> key >> tree.config.stop_size) || key != "stop_size")
        throw std::runtime_error("model: malformed header (stop_size)");
    if (!(in >> key >> stop_entropy_tok) || key != "stop_entropy")
        throw std::runtime_error("model: malformed header (stop_entropy)");
    tree.config.stop_entropy = parse_double(stop_entropy_tok, "stop_entropy");
    if (tree.dimension < 1) throw std::runtime_error("model: invalid dimensionality");

    read_node(tree, in);
    std::string extra;
    if (in >> extra) throw std::runtime_error("model: trailing content after tree");
    return tree;
}

void save_model(const DecisionTree& tree, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("model: cannot write " + path.string());
    out << serialize_model(tree);
    if (!out) throw std::runtime_error("model: write failed for " + path.string());
}

DecisionTree load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("model: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

void save_pairs(const TrainingSet& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("pairs: cannot write " + path.string());
    const int dim = dataset.dimension();
    const int first = dim == 21 ? 3 : 1;  // truncated sets start at v3
    for (int k = 0; k < dim; ++k) out << "v" << (first + k) << ",";
    out << "y\n";
    for (const auto& row : dataset.rows) {
        for (double v : row.values) out << format_double(v) << ",";
        out << row.label << "\n";
    }
    if (!out) throw std::runtime_error("pairs: write failed for " + path.string());
}

TrainingSet load_pairs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("pairs: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("pairs: empty file " + path.string());

    TrainingSet set;
    int dim = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TrainingRow row;
        std::size_t start = 0;
        std::vector<double> fields;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            std::string tok = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                            : comma - start);
            fields.push_back(parse_double(tok, "pairs value"));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() < 2) throw std::runtime_error("pairs: malformed row '" + line + "'");
        row.label = static_cast<int>(fields.back());
        if (row.label != 0 && row.label != 1)
            throw std::runtime_error("pairs: label must be 0 or 1");
        fields.pop_back();
        row.values = std::move(fields);
        if (dim < 0) dim = static_cast<int>(row.values.size());
        if (static_cast<int>(row.values.size()) != dim)
            throw std::runtime_error("pairs: inconsistent column count");
        set.rows.push_back(std::move(row));
    }
    if (set.rows.empty()) throw std::runtime_error("pairs: no data rows in " + path.string());
    return set;
}

double misclassification(const DecisionTree& tree, const TrainingSet& dataset) {
    if (dataset.rows.empty()) throw std::invalid_argument("misclassification: empty dataset");
    std::int64_t wrong = 0;
    for (const auto& row : dataset.rows) {
        int predicted = tree.classify(row.values) > 0.5 ? 1 : 0;
        wrong += predicted != row.label;
    }
    return static_cast<double>(wrong) / static_cast<double>(dataset.rows.size());
}

ProtocolResult evaluate_protocol(const TrainingSet& dataset, const TrainConfig& config,
                                 const std::vector<int>& depths, int runs, std::uint64_t seed) {
    if (dataset.rows.size() < 10)
        throw std::invalid_argument("evaluate_protocol: dataset too small");
    if (runs < 1 || depths.empty()) throw std::invalid_argument("evaluate_protocol: bad arguments");

    ProtocolResult result;
    result.depths = depths;
    result.runs = runs;
    result.mean_test_error.assign(depths.size(), 0.0);

    std::mt19937_64 rng(seed);
    const std::size_t n = dataset.rows.size();
    const std::size_t n_train = n * 7 / 10;
    std::vector<int> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);

    for (int run = 0; run < runs; ++run) {
        std::shuffle(perm.begin(), perm.end(), rng);
        TrainingSet train_set, test_set;
        train_set.rows.reserve(n_train);
        test_set.rows.reserve(n - n_train);
        for (std::size_t i = 0; i < n; ++i)
            (i < n_train ? train_set : test_set).rows.push_back(dataset.rows[perm[i]]);
        for (std::size_t d = 0; d < depths.size(); ++d) {
            TrainConfig cfg = config;
            cfg.max_depth = depths[d];
            DecisionTree tree = train(train_set, cfg);
            result.mean_test_error[d] += misclassification(tree, test_set);
        }
    }
    for (double& e : result.mean_test_error) e /= runs;
    return result;
}

std::string ProtocolResult::to_text() const {
    std::ostringstream out;
    out << "depth  mean_test_error\n";
    char buf[64];
    for (std::size_t i = 0; i < depths.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%-6d %.4f%%\n", depths[i], mean_test_error[i] * 100.0);
        out << buf;
    }
    out << "runs " << runs << "\n";
    return out.str();
}

}  // namespace celltrack
