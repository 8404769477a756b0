#include "exo/forest.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "exo/rng.hpp"

namespace exo {

namespace {

constexpr const char* kModelFormat = "exo-forest";
constexpr int kModelVersion = 1;

double gini(std::size_t n_open, std::size_t n) {
    const double po = static_cast<double>(n_open) / static_cast<double>(n);
    const double pc = static_cast<double>(n - n_open) / static_cast<double>(n);
    return 1.0 - po * po - pc * pc;
}

// Grows one tree on a bootstrap resample.  Works on an index list into the
// full training set; children partitions preserve sample order so the build
// is independent of how equal values happen to be arranged by the sort.
class TreeBuilder {
public:
    TreeBuilder(const TrainingSet& samples, const ForestHyperparams& hp, std::uint64_t tree_seed)
        : samples_(samples), hp_(hp), rng_(tree_seed) {}

    DecisionTree build() {
        const std::size_t n = samples_.size();
        std::vector<std::uint32_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(rng_.next_below(n));
        DecisionTree tree;
        grow(tree, idx, 0);  // the root sits at depth 0: max_depth=1 yields a stump
        return tree;
    }

private:
    struct Split {
        double gain = 0.0;
        int channel = -1;
        double threshold = 0.0;
    };

    std::int32_t grow(DecisionTree& tree, const std::vector<std::uint32_t>& idx, int depth) {
        const std::size_t n = idx.size();
        std::size_t n_open = 0;
        for (std::uint32_t i : idx) {
            if (samples_[i].second == HandState::Open) ++n_open;
        }

        const std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();

        const bool pure = n_open == 0 || n_open == n;
        const bool depth_capped = hp_.max_depth > 0 && depth >= hp_.max_depth;
        const bool too_small = n < 2 * static_cast<std::size_t>(hp_.min_samples_leaf);

        Split best;
        if (!pure && !depth_capped && !too_small) best = find_split(idx, n, n_open);

        if (best.channel < 0) {
            tree.nodes[node_id].open_fraction = static_cast<double>(n_open) / static_cast<double>(n);
            return node_id;
        }

        std::vector<std::uint32_t> left, right;
        left.reserve(n);
        right.reserve(n);
        for (std::uint32_t i : idx) {
            const double v = samples_[i].first.channels[best.channel];
            (v <= best.threshold ? left : right).push_back(i);
        }

        tree.nodes[node_id].channel = static_cast<std::int16_t>(best.channel);
        tree.nodes[node_id].threshold = best.threshold;
        const std::int32_t l = grow(tree, left, depth + 1);
        tree.nodes[node_id].left = l;
        const std::int32_t r = grow(tree, right, depth + 1);
        tree.nodes[node_id].right = r;
        return node_id;
    }

    Split find_split(const std::vector<std::uint32_t>& idx, std::size_t n, std::size_t n_open) {
        // Draw the candidate channels without replacement, then evaluate them
        // in ascending order so a gain tie resolves to the lowest channel.
        // If every drawn channel is constant over this node the search spills
        // into the remaining channels rather than giving up — a node only
        // becomes a mixed leaf when no channel anywhere can separate it.
        std::array<int, kNumChannels> chans{0, 1, 2, 3, 4, 5, 6, 7};
        const int k = hp_.features_per_split;
        for (int j = 0; j + 1 < static_cast<int>(kNumChannels); ++j) {
            const int swap_at = j + static_cast<int>(rng_.next_below(kNumChannels - j));
            std::swap(chans[j], chans[swap_at]);
        }
        std::sort(chans.begin(), chans.begin() + k);
        std::sort(chans.begin() + k, chans.end());

        const double parent = gini(n_open, n);
        const std::size_t msl = static_cast<std::size_t>(hp_.min_samples_leaf);
        Split best;

        std::vector<std::pair<double, bool>> vals;  // (channel value, is Open)
        vals.reserve(n);
        for (int j = 0; j < static_cast<int>(kNumChannels); ++j) {
            if (j >= k && best.channel >= 0) break;
            const int c = chans[j];
            vals.clear();
            for (std::uint32_t i : idx) {
                vals.emplace_back(samples_[i].first.channels[c], samples_[i].second == HandState::Open);
            }
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            // Sweep left-to-right; candidate thresholds sit between distinct
            // consecutive values, so equal values always land on one side.
            std::size_t left_open = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (vals[i - 1].second) ++left_open;
                if (vals[i].first == vals[i - 1].first) continue;
                if (i < msl || n - i < msl) continue;
                const double gain = parent -
                                    (static_cast<double>(i) / n) * gini(left_open, i) -
                                    (static_cast<double>(n - i) / n) * gini(n_open - left_open, n - i);
                if (gain > best.gain) {  // strict: earlier (channel, threshold) wins ties
                    best.gain = gain;
                    best.channel = c;
                    best.threshold = (vals[i - 1].first + vals[i].first) / 2;
                }
            }
        }
        return best;
    }

    const TrainingSet& samples_;
    const ForestHyperparams& hp_;
    Rng rng_;
};

}  // namespace

void ForestHyperparams::validate() const {
    if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0 (0 = unbounded)");
    if (features_per_split < 1 || features_per_split > static_cast<int>(kNumChannels)) {
        throw std::invalid_argument("features_per_split must be in [1, 8]");
    }
    if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
}

double DecisionTree::predict(const EmgFrame& frame) const {
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf()) {
        const double v = frame.channels[node->channel];
        node = &nodes[v <= node->threshold ? node->left : node->right];
    }
    return node->open_fraction;
}

ForestModel train_forest(const TrainingSet& samples, const ForestHyperparams& hp) {
    hp.validate();
    if (samples.empty()) throw std::invalid_argument("training set is empty");
    bool any_open = false, any_close = false;
    for (const auto& [frame, label] : samples) {
        validate_frame(frame);
        (label == HandState::Open ? any_open : any_close) = true;
    }
    if (!any_open || !any_close) {
        throw std::invalid_argument("training set must contain both Open and Close samples");
    }

    ForestModel model;
    model.hyperparams = hp;
    model.trees.reserve(hp.n_trees);
    for (int t = 0; t < hp.n_trees; ++t) {
        TreeBuilder builder(samples, hp, derive_seed(hp.rng_seed, static_cast<std::uint64_t>(t)));
        model.trees.push_back(builder.build());
    }
    return model;
}

double classify(const ForestModel& model, const EmgFrame& frame) {
    double sum = 0.0;
    for (const DecisionTree& tree : model.trees) sum += tree.predict(frame);
    return sum / static_cast<double>(model.trees.size());
}

double training_accuracy(const ForestModel& model, const TrainingSet& samples) {
    if (samples.empty()) throw std::invalid_argument("no samples to score");
    std::size_t hits = 0;
    for (const auto& [frame, label] : samples) {
        const HandState pred = classify(model, frame) >= 0.5 ? HandState::Open : HandState::Close;
        if (pred == label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

void save_model(const ForestModel& model, double sample_rate_hz, const std::string& path) {
    nlohmann::json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelVersion;
    doc["channels"] = kNumChannels;
    doc["sample_rate_hz"] = sample_rate_hz;
    doc["hyperparams"] = {
        {"n_trees", model.hyperparams.n_trees},
        {"max_depth", model.hyperparams.max_depth},
        {"features_per_split", model.hyperparams.features_per_split},
        {"min_samples_leaf", model.hyperparams.min_samples_leaf},
        {"rng_seed", model.hyperparams.rng_seed},
    };
    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& tree : model.trees) {
        nlohmann::json t;
        auto& channel = t["channel"] = nlohmann::json::array();
        auto& threshold = t["threshold"] = nlohmann::json::array();
        auto& left = t["left"] = nlohmann::json::array();
        auto& right = t["right"] = nlohmann::json::array();
        auto& fraction = t["open_fraction"] = nlohmann::json::array();
        for (const TreeNode& n : tree.nodes) {
            channel.push_back(n.channel);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            fraction.push_back(n.open_fraction);
        }
        trees.push_back(std::move(t));
    }
    doc["trees"] = std::move(trees);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file '" + path + "' is not valid JSON: " + e.what());
    }

    try {
        if (doc.at("format") != kModelFormat) throw std::runtime_error("unrecognized format tag");
        if (doc.at("version") != kModelVersion) {
            throw std::runtime_error("unsupported model version " + doc.at("version").dump());
        }
        if (doc.at("channels") != kNumChannels) {
            throw std::runtime_error("model expects " + doc.at("channels").dump() + " channels, this build has 8");
        }

        LoadedModel loaded;
        loaded.sample_rate_hz = doc.at("sample_rate_hz").get<double>();
        const auto& hp = doc.at("hyperparams");
        loaded.model.hyperparams.n_trees = hp.at("n_trees").get<int>();
        loaded.model.hyperparams.max_depth = hp.at("max_depth").get<int>();
        loaded.model.hyperparams.features_per_split = hp.at("features_per_split").get<int>();
        loaded.model.hyperparams.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
        loaded.model.hyperparams.rng_seed = hp.at("rng_seed").get<std::uint64_t>();

        for (const auto& t : doc.at("trees")) {
            DecisionTree tree;
            const auto& channel = t.at("channel");
            const auto& threshold = t.at("threshold");
            const auto& left = t.at("left");
            const auto& right = t.at("right");
            const auto& fraction = t.at("open_fraction");
            const std::size_t count = channel.size();
            if (threshold.size() != count || left.size() != count || right.size() != count ||
                fraction.size() != count || count == 0) {
                throw std::runtime_error("tree node arrays are inconsistent");
            }
            tree.nodes.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                TreeNode& n = tree.nodes[i];
                n.channel = channel[i].get<std::int16_t>();
                n.threshold = threshold[i].get<double>();
                n.left = left[i].get<std::int32_t>();
                n.right = right[i].get<std::int32_t>();
                n.open_fraction = fraction[i].get<double>();
                const bool leaf = n.channel < 0;
                const bool has_kids = n.left >= 0 && n.left < static_cast<std::int32_t>(count) &&
                                      n.right >= 0 && n.right < static_cast<std::int32_t>(count);
                if (!leaf && (!has_kids || n.channel >= static_cast<int>(kNumChannels))) {
                    throw std::runtime_error("tree node " + std::to_string(i) + " is malformed");
                }
            }
            loaded.model.trees.push_back(std::move(tree));
        }
        if (loaded.model.trees.empty()) throw std::runtime_error("model holds no trees");
        return loaded;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file '" + path + "' is malformed: " + e.what());
    }
}

}  // namespace exo
