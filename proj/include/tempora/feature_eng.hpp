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

#include <cstdint>
#include <utility>
#include <vector>

namespace tempora {

struct FeatureEngConfig {
    std::size_t n_products = 0;
    double dropout_pct = 0.0;
    std::uint64_t seed = 0;
    // When set, every era reuses one mask indexed by (row, column) instead of a fresh per-era draw.
    bool fixed_mask = false;

    void validate(std::size_t n_features) const;
};

// n distinct unordered pairs (i < j) of [0, m), drawn uniformly without replacement, sorted.
std::vector<std::pair<std::size_t, std::size_t>> sample_feature_pairs(std::size_t m, std::size_t n, std::uint64_t seed);

// Appends one column per sampled pair holding the product of its parents, named p_<i>_<j>.
PanelSet product_features(const PanelSet& panel, const FeatureEngConfig& cfg);

// Boolean keep-mask (column-major, true = keep) for one era.
std::vector<bool> dropout_mask(std::size_t rows, std::size_t cols, EraId era, const FeatureEngConfig& cfg);

// Zeroes each (row, feature) entry independently with probability dropout_pct.
PanelSet apply_dropout_mask(const PanelSet& panel, const FeatureEngConfig& cfg);

} // namespace tempora
