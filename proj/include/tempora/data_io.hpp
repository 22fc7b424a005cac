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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tempora {

// Panel CSV: header `era,id,f_<name>...,t_<name>...`; empty target field = unresolved.
PanelSet read_panel_csv(const std::filesystem::path& path);
PanelSet parse_panel_csv(std::istream& in);
void write_panel_csv(const std::filesystem::path& path, const PanelSet& panel);
void write_panel_csv(std::ostream& out, const PanelSet& panel);

struct EraPredictions {
    std::vector<std::string> ids;
    std::vector<double> scores;
};

using PredictionSet = std::map<EraId, EraPredictions>;

// Prediction CSV `era,id,score`, rows ordered by (era, id), scores with 17 significant digits.
void write_predictions_csv(const std::filesystem::path& path, const PredictionSet& predictions);
void write_predictions_csv(std::ostream& out, const PredictionSet& predictions);
PredictionSet read_predictions_csv(const std::filesystem::path& path);

// Shortest-exact 17-significant-digit rendering used by every text format.
std::string format_real(double v);

struct RegimeSegment {
    EraId start;
    std::vector<double> factor_weights; // one per latent factor
    double noise_scale = 0.0;
};

struct SyntheticConfig {
    int n_eras = 120;
    int stocks_min = 400;
    int stocks_max = 600;
    int n_factors = 4;
    int n_features = 20;
    // Std of the noise added to each feature's view of its factor before binning.
    double feature_noise = 0.5;
    std::vector<RegimeSegment> regime_schedule;
    std::array<double, 5> target_bin_proportions{0.05, 0.20, 0.50, 0.20, 0.05};
    std::vector<std::string> target_names{"target"};
    std::uint64_t seed = 0;
    unsigned workers = 1;

    // Throws ConfigError when the invariants do not hold.
    void validate() const;
};

// Default single-regime schedule with decaying factor weights.
std::vector<RegimeSegment> default_regime_schedule(int n_factors);

// Latent-factor panel generator. Feature j is a binned noisy view of factor j mod n_factors.
// Each target is a binned rank of exposures · weights(regime) + noise; additional targets use
// independent noise draws. Fully determined by cfg.seed.
PanelSet generate_synthetic(const SyntheticConfig& cfg);

// Assigns each of n items (ranked by value, ties broken by `tiebreak` order) to one of
// counts.size() consecutive bins, bin b receiving counts[b] items.
std::vector<int> bin_by_rank(std::span<const double> values, std::span<const std::size_t> tiebreak,
                             std::span<const std::size_t> counts);

// Bin sizes for n items under the given proportions (largest-remainder rounding).
std::vector<std::size_t> bin_counts(std::size_t n, std::span<const double> proportions);

} // namespace tempora
