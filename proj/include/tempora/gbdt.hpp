/* Copyright 2026 The Tempora Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

	http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
--------------------------------------------------------------------------------------------------------------*/

#pragma once

#include "tempora/panel.hpp"
#include "tempora/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

enum class BoostMode { Gbdt, Dart, Goss };

std::string_view to_string(BoostMode mode);
BoostMode boost_mode_from_string(std::string_view text);

struct BoostConfig {
    BoostMode mode = BoostMode::Gbdt;
    int n_estimators = 100;
    double learning_rate = 0.1;
    int num_leaves = 31;
    int max_depth = -1; // <= 0: unlimited
    int min_data_in_leaf = 20;
    double lambda_l1 = 0.0;
    double lambda_l2 = 0.0;
    double feature_fraction = 1.0;
    double bagging_fraction = 1.0;
    int bagging_freq = 0;
    // Bagging applies only in gbdt mode unless this is set.
    bool bagging_in_all_modes = false;
    double drop_rate = 0.1;
    double skip_drop = 0.5;
    double top_rate = 0.2;
    double other_rate = 0.1;
    int early_stopping_patience = 0; // 0 disables; gbdt mode with validation data only
    std::uint64_t seed = 0;
    unsigned workers = 1;

    void validate() const;
};

// max(20, 0.1% of rows).
int default_min_data_in_leaf(std::size_t rows);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Binary regression tree; rows with x < threshold go left. Node 0 is the root.
class Tree {
public:
    std::vector<TreeNode> nodes;
    double weight = 1.0; // dart normalization multiplier

    double evaluate(const FeatureMatrix& x, std::size_t row) const;
    std::size_t leaf_count() const;
    int depth() const;

    friend bool operator==(const Tree&, const Tree&) = default;
};

struct Booster {
    BoostMode mode = BoostMode::Gbdt;
    double f0 = 0.0;
    double learning_rate = 0.1;
    std::vector<Tree> trees;

    // f0 + sum over trees k >= prune_first of learning_rate * weight_k * tree_k(x).
    // Throws ConfigError when prune_first exceeds half of the trees.
    std::vector<double> predict(const FeatureMatrix& x, std::size_t prune_first = 0) const;
    std::vector<double> predict(const PanelEra& era, std::size_t prune_first = 0) const;

    std::string serialize() const;
    static Booster deserialize(std::string_view text);

    friend bool operator==(const Booster&, const Booster&) = default;
};

void save_booster(const std::string& path, const Booster& booster);
Booster load_booster(const std::string& path);

// All rows of a panel stacked era after era, with one target.
struct TrainingData {
    FeatureMatrix features;
    std::vector<double> target;

    std::size_t rows() const noexcept { return target.size(); }

    // Throws DataError when any era lacks the target or the panel is empty.
    static TrainingData from_panel(const PanelSet& panel, std::string_view target);
};

// Row subset with optional per-row weights (empty = all 1).
struct RowSample {
    std::vector<std::uint32_t> rows;
    std::vector<double> weights;

    static RowSample all(std::size_t n);
    double weight(std::size_t k) const noexcept { return weights.empty() ? 1.0 : weights[k]; }
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

// sign(s) * max(|s| - l1, 0)
double soft_threshold(double sum, double l1) noexcept;

// Regularized leaf output: soft_threshold(sum, l1) / (count + l2).
double leaf_value(double sum, double count, const BoostConfig& cfg);

// Best variance-gain split over the given features, or nullopt. Candidate thresholds are midpoints
// of adjacent values present among the rows; both children need min_data_in_leaf rows. Gains within
// 1e-12 * sum(w * r^2) of the best are ties, resolved to the lowest feature, then the lowest
// threshold. A best gain at or below that tolerance means no split.
std::optional<SplitCandidate> find_best_split(const FeatureMatrix& x, std::span<const double> residuals,
                                              const RowSample& sample, std::span<const std::size_t> features,
                                              const BoostConfig& cfg);

// Leaf-wise growth on residuals restricted to the sample, capped by num_leaves / max_depth.
Tree grow_tree(const FeatureMatrix& x, std::span<const double> residuals, const RowSample& sample,
               std::span<const std::size_t> features, const BoostConfig& cfg);

// Keeps the ceil(a*n) largest |gradient| rows (weight 1) plus ceil(b*n) uniform draws from the rest
// (weight (1-a)/b). Falls back to all rows with weight 1 when the groups would cover the data.
RowSample goss_sample(std::span<const double> gradients, double top_rate, double other_rate, Rng& rng);

// Training state for step-wise boosting.
struct BoostState {
    Booster booster;
    std::vector<double> train_pred; // cached f(x) on training rows
};

BoostState init_boost(const TrainingData& data, const BoostConfig& cfg);

// One plain boosting round on the given sample. Returns false when no split was possible.
bool gbdt_step(BoostState& state, const TrainingData& data, const RowSample& sample,
               std::span<const std::size_t> features, const BoostConfig& cfg);

// One dart round with an explicit set of dropped tree indices.
void dart_apply(BoostState& state, const TrainingData& data, std::span<const std::size_t> dropped,
                const RowSample& sample, std::span<const std::size_t> features, const BoostConfig& cfg);

// One dart round: skip with probability skip_drop, else drop each tree with probability drop_rate
// (at least one). With no existing trees this is a plain round. Returns the dropped indices.
std::vector<std::size_t> dart_step(BoostState& state, const TrainingData& data, const RowSample& sample,
                                   std::span<const std::size_t> features, const BoostConfig& cfg, Rng& rng);

struct TrainReport {
    std::vector<double> train_loss;      // after each round
    std::vector<double> validation_loss; // after each round, when validation data is given
    int best_iteration = 0;
    bool stopped_early = false;
};

double l2_loss(std::span<const double> prediction, std::span<const double> target);

Booster train(const TrainingData& data, const BoostConfig& cfg, const TrainingData* validation = nullptr,
              TrainReport* report = nullptr);
Booster train(const PanelSet& train_panel, std::string_view target, const BoostConfig& cfg,
              const PanelSet* validation = nullptr, TrainReport* report = nullptr);

} // namespace tempora
