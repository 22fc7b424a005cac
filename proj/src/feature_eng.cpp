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

#include "tempora/feature_eng.hpp"

#include "tempora/error.hpp"
#include "tempora/random.hpp"

#include <algorithm>

namespace tempora {

void FeatureEngConfig::validate(std::size_t n_features) const
{
    const std::size_t pairs = n_features < 2 ? 0 : n_features * (n_features - 1) / 2;
    if (n_products > pairs) {
        throw ConfigError("fe.n_products = " + std::to_string(n_products) + " exceeds the " + std::to_string(pairs) +
                          " available feature pairs");
    }
    if (!(dropout_pct >= 0.0 && dropout_pct <= 1.0)) {
        throw ConfigError("fe.dropout_pct must lie in [0, 1]");
    }
}

std::vector<std::pair<std::size_t, std::size_t>> sample_feature_pairs(std::size_t m, std::size_t n,
                                                                      std::uint64_t seed)
{
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            all.emplace_back(i, j);
        }
    }
    if (n > all.size()) {
        throw ConfigError("requested " + std::to_string(n) + " pairs from " + std::to_string(all.size()));
    }
    auto rng = make_stream(seed, "fe.pairs");
    // partial Fisher-Yates
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t pick = k + uniform_below(rng, all.size() - k);
        std::swap(all[k], all[pick]);
    }
    all.resize(n);
    std::sort(all.begin(), all.end());
    return all;
}

PanelSet product_features(const PanelSet& panel, const FeatureEngConfig& cfg)
{
    const std::size_t m = panel.schema.feature_count();
    cfg.validate(m);
    const auto pairs = sample_feature_pairs(m, cfg.n_products, cfg.seed);
    PanelSet out = panel;
    for (const auto& [i, j] : pairs) {
        out.schema.feature_names.push_back("p_" + std::to_string(i) + "_" + std::to_string(j));
        out.schema.feature_kinds.push_back(FeatureKind::Product);
    }
    std::vector<std::int8_t> col;
    for (auto& era : out.eras) {
        for (const auto& [i, j] : pairs) {
            const auto a = era.features.column(i);
            const auto b = era.features.column(j);
            col.resize(a.size());
            for (std::size_t r = 0; r < a.size(); ++r) {
                col[r] = static_cast<std::int8_t>(a[r] * b[r]);
            }
            era.features.append_column(col);
        }
    }
    return out;
}

std::vector<bool> dropout_mask(std::size_t rows, std::size_t cols, EraId era, const FeatureEngConfig& cfg)
{
    std::vector<bool> keep(rows * cols, true);
    if (cfg.dropout_pct <= 0.0) {
        return keep;
    }
    const std::uint64_t counter = cfg.fixed_mask ? 0 : static_cast<std::uint64_t>(era.index);
    auto rng = make_stream(cfg.seed, cfg.fixed_mask ? "fe.dropout.fixed" : "fe.dropout", counter);
    if (cfg.fixed_mask) {
        // row-major draw so that row r sees the same mask whatever the era's row count
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                keep[c * rows + r] = !(uniform01(rng) < cfg.dropout_pct);
            }
        }
    } else {
        for (std::size_t k = 0; k < rows * cols; ++k) {
            keep[k] = !(uniform01(rng) < cfg.dropout_pct);
        }
    }
    return keep;
}

PanelSet apply_dropout_mask(const PanelSet& panel, const FeatureEngConfig& cfg)
{
    cfg.validate(panel.schema.feature_count());
    PanelSet out = panel;
    if (cfg.dropout_pct <= 0.0) {
        return out;
    }
    for (auto& era : out.eras) {
        const std::size_t rows = era.features.rows();
        const std::size_t cols = era.features.cols();
        const auto keep = dropout_mask(rows, cols, era.era, cfg);
        for (std::size_t c = 0; c < cols; ++c) {
            auto col = era.features.column(c);
            for (std::size_t r = 0; r < rows; ++r) {
                if (!keep[c * rows + r]) {
                    col[r] = 0;
                }
            }
        }
    }
    return out;
}

} // namespace tempora
