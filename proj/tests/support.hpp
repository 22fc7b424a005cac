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

#include "tempora/data_io.hpp"
#include "tempora/panel.hpp"
#include "tempora/random.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tempora::testing {

inline constexpr double kTargetBins[] = {-0.5, -0.25, 0.0, 0.25, 0.5};

// Uniform random panel with valid features and targets; eras 1..n_eras.
inline PanelSet random_panel(int n_eras, std::size_t rows, std::size_t n_features, std::uint64_t seed,
                             std::vector<std::string> targets = {"target"})
{
    std::vector<std::string> names;
    for (std::size_t j = 0; j < n_features; ++j) {
        names.push_back("f" + std::to_string(j));
    }
    PanelSet p;
    p.schema = PanelSchema::make(names, targets);
    auto rng = make_stream(seed, "test.panel");
    for (int e = 1; e <= n_eras; ++e) {
        PanelEra era;
        era.era = EraId{e};
        era.features = FeatureMatrix(rows, n_features);
        for (std::size_t r = 0; r < rows; ++r) {
            era.ids.push_back("e" + std::to_string(e) + "r" + std::to_string(r));
            for (std::size_t j = 0; j < n_features; ++j) {
                era.features(r, j) = static_cast<std::int8_t>(static_cast<int>(uniform_below(rng, 5)) - 2);
            }
        }
        for (const auto& t : targets) {
            std::vector<double> y(rows);
            for (auto& v : y) {
                v = kTargetBins[uniform_below(rng, 5)];
            }
            era.targets[t] = std::move(y);
        }
        p.eras.push_back(std::move(era));
    }
    return p;
}

inline SyntheticConfig small_synthetic(int n_eras, std::uint64_t seed)
{
    SyntheticConfig c;
    c.n_eras = n_eras;
    c.stocks_min = 120;
    c.stocks_max = 160;
    c.n_features = 12;
    c.seed = seed;
    c.regime_schedule = default_regime_schedule(c.n_factors);
    return c;
}

} // namespace tempora::testing
