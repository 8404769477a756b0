#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "exo/types.hpp"

namespace exo {

struct ForestHyperparams {
    int n_trees = 64;
    int max_depth = 0;  // 0 = grow until pure or out of useful splits
    int features_per_split = 3;
    int min_samples_leaf = 1;
    std::uint64_t rng_seed = 0;

    /// Throws std::invalid_argument when any field is out of range.
    void validate() const;

    bool operator==(const ForestHyperparams&) const = default;
};

/// One node of a decision tree, stored in a flat array.  Interior nodes route
/// on a single raw channel: value <= threshold goes left, otherwise right.
/// Leaves carry the fraction of Open training samples that reached them.
struct TreeNode {
    std::int16_t channel = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double open_fraction = 0.0;

    bool is_leaf() const { return channel < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    /// Leaf open-fraction for this frame.
    double predict(const EmgFrame& frame) const;

    bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    ForestHyperparams hyperparams;

    bool operator==(const ForestModel&) const = default;
};

using TrainingSet = std::vector<std::pair<EmgFrame, HandState>>;

/// Fits a bagged forest of Gini-split decision trees on raw channel values.
/// Tree t draws its bootstrap resample and per-node feature subsets from an
/// RNG substream derived from (rng_seed, t), so training is deterministic for
/// a given seed no matter how often it is repeated.  Split candidates are the
/// midpoints between consecutive distinct values of a channel; ties in Gini
/// gain go to the lowest (channel, threshold) pair.
///
/// Throws std::invalid_argument on empty or single-class data.
ForestModel train_forest(const TrainingSet& samples, const ForestHyperparams& hp);

/// Probability that the frame expresses Open intent: the mean of the per-tree
/// leaf fractions, always in [0, 1].  The Close probability is its complement.
double classify(const ForestModel& model, const EmgFrame& frame);

/// Fraction of samples whose thresholded prediction (p >= 0.5 -> Open) agrees
/// with the stored label.
double training_accuracy(const ForestModel& model, const TrainingSet& samples);

struct LoadedModel {
    ForestModel model;
    double sample_rate_hz = 50.0;
};

// Versioned JSON model files.  Thresholds and leaf fractions are written in
// shortest round-trip form, so a reloaded model classifies bit-identically.
void save_model(const ForestModel& model, double sample_rate_hz, const std::string& path);
LoadedModel load_model(const std::string& path);

}  // namespace exo
