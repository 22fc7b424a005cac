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

#include "oracles.hpp"
#include "support.hpp"

#include "tempora/error.hpp"
#include "tempora/gbdt.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace tempora;

namespace {

TrainingData make_training_data(Rng& rng, std::size_t rows, std::size_t cols)
{
    TrainingData d;
    d.features = FeatureMatrix(rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) {
            d.features(r, c) = static_cast<std::int8_t>(static_cast<int>(uniform_below(rng, 5)) - 2);
        }
    }
    d.target.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        // mild signal on feature 0 so splits are not pure noise
        d.target[r] = testing::kTargetBins[uniform_below(rng, 5)] + 0.05 * d.features(r, 0);
    }
    return d;
}

} // namespace

TEST_CASE("f0 is the target mean")
{
    Rng rng(1);
    const auto d = make_training_data(rng, 333, 3);
    BoostConfig cfg;
    cfg.n_estimators = 3;
    const auto b = train(d, cfg);
    CHECK(std::abs(b.f0 - testing::mean_in_order(d.target)) <= 1e-12);
}

TEST_CASE("depth-1 trees equal the brute-force stump")
{
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = make_training_data(rng, 2 + uniform_below(rng, 300), 1 + uniform_below(rng, 5));
        BoostConfig cfg;
        cfg.n_estimators = 1;
        cfg.max_depth = 1;
        cfg.min_data_in_leaf = 1 + static_cast<int>(uniform_below(rng, 10));
        const auto b = train(d, cfg);
        const auto o = testing::brute_force_stump(d.features, d.target, static_cast<std::size_t>(cfg.min_data_in_leaf));
        CAPTURE(trial);
        if (!o.split) {
            CHECK(b.trees.empty());
            continue;
        }
        REQUIRE(b.trees.size() == 1);
        const auto& root = b.trees[0].nodes[0];
        CHECK(root.feature == o.feature);
        CHECK(root.threshold == o.threshold);
        CHECK(b.trees[0].nodes[static_cast<std::size_t>(root.left)].value == o.left_value);
        CHECK(b.trees[0].nodes[static_cast<std::size_t>(root.right)].value == o.right_value);
    }
}

TEST_CASE("soft threshold and regularized leaf values")
{
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    BoostConfig cfg;
    cfg.lambda_l1 = 0.5;
    cfg.lambda_l2 = 1.0;
    CHECK(leaf_value(4.5, 3.0, cfg) == doctest::Approx(1.0));
    CHECK(leaf_value(3.0, 2.0, cfg) == doctest::Approx(2.5 / 3.0).epsilon(1e-15));
    CHECK(leaf_value(-3.0, 2.0, cfg) == doctest::Approx(-2.5 / 3.0).epsilon(1e-15));
    CHECK(leaf_value(0.0, 2.0, cfg) == 0.0);
    CHECK(leaf_value(0.4, 2.0, cfg) == 0.0);
}

TEST_CASE("trees respect num_leaves, max_depth and min_data_in_leaf")
{
    Rng rng(3);
    const auto d = make_training_data(rng, 2000, 6);
    for (int leaves : {2, 5, 16}) {
        for (int depth : {-1, 2, 3}) {
            BoostConfig cfg;
            cfg.n_estimators = 5;
            cfg.num_leaves = leaves;
            cfg.max_depth = depth;
            cfg.min_data_in_leaf = 40;
            const auto b = train(d, cfg);
            for (const auto& t : b.trees) {
                CHECK(t.leaf_count() <= static_cast<std::size_t>(leaves));
                if (depth > 0) {
                    CHECK(t.depth() <= depth);
                }
                std::vector<std::size_t> occupancy(t.nodes.size(), 0);
                for (std::size_t i = 0; i < d.rows(); ++i) {
                    std::size_t node = 0;
                    while (!t.nodes[node].is_leaf()) {
                        const auto& n = t.nodes[node];
                        node = static_cast<std::size_t>(
                            d.features(i, static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right);
                    }
                    ++occupancy[node];
                }
                for (std::size_t n = 0; n < t.nodes.size(); ++n) {
                    if (t.nodes[n].is_leaf()) {
                        CHECK(occupancy[n] >= 40);
                    }
                }
            }
        }
    }
}

TEST_CASE("training loss never increases in plain gbdt mode")
{
    Rng rng(4);
    const auto d = make_training_data(rng, 1500, 5);
    BoostConfig cfg;
    cfg.n_estimators = 60;
    cfg.num_leaves = 8;
    TrainReport rep;
    train(d, cfg, nullptr, &rep);
    for (std::size_t i = 1; i < rep.train_loss.size(); ++i) {
        CHECK(rep.train_loss[i] <= rep.train_loss[i - 1]);
    }
}

TEST_CASE("serialization round-trips bit for bit")
{
    Rng rng(5);
    const auto d = make_training_data(rng, 800, 4);
    for (auto mode : {BoostMode::Gbdt, BoostMode::Dart, BoostMode::Goss}) {
        BoostConfig cfg;
        cfg.mode = mode;
        cfg.n_estimators = 12;
        cfg.num_leaves = 6;
        cfg.seed = 77;
        const auto b = train(d, cfg);
        const auto text = b.serialize();
        CHECK(text.rfind("tempora-booster v1 mode=" + std::string(to_string(mode)), 0) == 0);
        // node numbering is canonicalized to pre-order, so compare text and predictions
        const auto back = Booster::deserialize(text);
        CHECK(back.serialize() == text);
        CHECK(back.predict(d.features) == b.predict(d.features));
        CHECK(Booster::deserialize(text) == back);
    }
    CHECK_THROWS_AS(Booster::deserialize("tempora-booster v2 mode=gbdt f0=0 lr=0.1\n"), DataError);
}

TEST_CASE("training is independent of the worker count")
{
    Rng rng(6);
    const auto d = make_training_data(rng, 1200, 8);
    for (auto mode : {BoostMode::Gbdt, BoostMode::Dart, BoostMode::Goss}) {
        BoostConfig cfg;
        cfg.mode = mode;
        cfg.n_estimators = 15;
        cfg.feature_fraction = 0.7;
        cfg.bagging_fraction = 0.8;
        cfg.bagging_freq = 3;
        cfg.seed = 9;
        const auto one = train(d, cfg).serialize();
        cfg.workers = 4;
        CHECK(train(d, cfg).serialize() == one);
    }
}

TEST_CASE("pruning keeps the tree suffix and is capped at half the trees")
{
    Rng rng(7);
    const auto d = make_training_data(rng, 400, 3);
    BoostConfig cfg;
    cfg.n_estimators = 6;
    cfg.num_leaves = 4;
    const auto b = train(d, cfg);
    REQUIRE(b.trees.size() == 6);
    for (std::size_t k = 0; k <= 3; ++k) {
        const auto got = b.predict(d.features, k);
        const auto want = testing::suffix_sum_prediction(b, d.features, k);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(b.predict(d.features, 4), ConfigError);
}

TEST_CASE("dart normalization scales new and dropped trees")
{
    Rng rng(8);
    const auto d = make_training_data(rng, 500, 3);
    BoostConfig cfg;
    cfg.mode = BoostMode::Dart;
    cfg.num_leaves = 4;
    auto state = init_boost(d, cfg);
    const auto sample = RowSample::all(d.rows());
    const std::vector<std::size_t> features{0, 1, 2};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(gbdt_step(state, d, sample, features, cfg));
    }
    const std::vector<std::size_t> dropped{0, 2};
    dart_apply(state, d, dropped, sample, features, cfg);
    const auto& t = state.booster.trees;
    REQUIRE(t.size() == 4);
    CHECK(t[0].weight == doctest::Approx(2.0 / 3.0));
    CHECK(t[1].weight == 1.0);
    CHECK(t[2].weight == doctest::Approx(2.0 / 3.0));
    CHECK(t[3].weight == doctest::Approx(1.0 / 3.0));
    const auto pred = state.booster.predict(d.features);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        CHECK(state.train_pred[i] == doctest::Approx(pred[i]).epsilon(1e-12));
    }
}

TEST_CASE("goss keeps the largest gradients and amplifies the sampled rest")
{
    std::vector<double> g(100);
    std::iota(g.begin(), g.end(), -50.0);
    Rng rng(1);
    const auto s = goss_sample(g, 0.2, 0.1, rng);
    REQUIRE(s.rows.size() == 30);
    std::size_t top = 0;
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
        const double mag = std::abs(g[s.rows[k]]);
        if (s.weights[k] == 1.0) {
            ++top;
            CHECK(mag >= 40.0);
        } else {
            CHECK(s.weights[k] == doctest::Approx(8.0));
            CHECK(mag <= 40.0);
        }
    }
    CHECK(top == 20);
    Rng rng2(1);
    CHECK(goss_sample(std::vector<double>(5, 1.0), 0.6, 0.5, rng2).rows.size() == 5);
}

TEST_CASE("early stopping truncates to the best validation round")
{
    Rng rng(9);
    const auto d = make_training_data(rng, 600, 4);
    const auto v = make_training_data(rng, 600, 4);
    BoostConfig cfg;
    cfg.n_estimators = 300;
    cfg.num_leaves = 31;
    cfg.min_data_in_leaf = 2;
    cfg.learning_rate = 0.3;
    cfg.early_stopping_patience = 5;
    TrainReport rep;
    const auto b = train(d, cfg, &v, &rep);
    CHECK(rep.stopped_early);
    CHECK(b.trees.size() == static_cast<std::size_t>(rep.best_iteration));
}

TEST_CASE("config validation")
{
    BoostConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.learning_rate = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.mode = BoostMode::Goss;
    bad.top_rate = 0.7;
    bad.other_rate = 0.4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.feature_fraction = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(default_min_data_in_leaf(1000) == 20);
    CHECK(default_min_data_in_leaf(100000) == 100);
}

TEST_CASE("best split on the five-row stump case")
{
    FeatureMatrix x(5, 1);
    for (int i = 0; i < 5; ++i) {
        x(static_cast<std::size_t>(i), 0) = static_cast<std::int8_t>(i - 2);
    }
    const std::vector<double> r{-1.0, -1.0, 0.0, 1.0, 1.0};

    // Exhaustive oracle over the four midpoints: gain = SL^2/nL + SR^2/nR - S^2/n.
    std::vector<std::pair<double, double>> candidates;
    for (int cut = 1; cut < 5; ++cut) {
        double sl = 0.0;
        double sr = 0.0;
        for (int i = 0; i < 5; ++i) {
            (i < cut ? sl : sr) += r[static_cast<std::size_t>(i)];
        }
        const double gain = sl * sl / cut + sr * sr / (5 - cut);
        candidates.push_back({cut - 2 - 0.5, gain});
    }
    double best_gain = -1.0;
    double best_threshold = 0.0;
    for (const auto& [t, g] : candidates) {
        if (g > best_gain + 1e-12) {
            best_gain = g;
            best_threshold = t;
        }
    }
    CHECK(best_threshold == -0.5);
    CHECK(best_gain == doctest::Approx(10.0 / 3.0));

    BoostConfig cfg;
    cfg.min_data_in_leaf = 1;
    const std::size_t features[] = {0};
    const auto got = find_best_split(x, r, RowSample::all(5), features, cfg);
    REQUIRE(got.has_value());
    CHECK(got->feature == 0);
    CHECK(got->threshold == best_threshold);
    CHECK(got->gain == doctest::Approx(best_gain).epsilon(1e-12));
    CHECK(got->left_count == 2);
    CHECK(got->right_count == 3);

    cfg.min_data_in_leaf = 3;
    CHECK(!find_best_split(x, r, RowSample::all(5), features, cfg).has_value());
}
