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

#include "tempora/gbdt.hpp"
#include "tempora/metrics.hpp"
#include "tempora/panel.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

// Produces per-era scores whose ordering ranks the era's rows.
class RankingModel {
public:
    virtual ~RankingModel() = default;

    virtual void fit(const PanelSet& train, std::string_view target, std::uint64_t seed) = 0;

    // Deterministic after fit; never reads the era's targets.
    virtual std::vector<double> predict(const PanelEra& era) const = 0;

    // Hands over an era whose targets have been resolved. Default: ignored.
    virtual void observe(const PanelEra& resolved) { (void)resolved; }

    virtual std::string name() const = 0;
};

inline constexpr int kMomentumWindow = 52;
inline constexpr int kMomentumLag = 6;

// Sum of features signed by their mean per-era Corr over the trailing <= window eras of
// `history` that carry the target. Features with a zero mean are dropped. `history` must end
// at or before t - lag; callers enforce the lag. Throws NotReadyError without usable history.
std::vector<double> factor_momentum_predict(std::span<const PanelEra> history, const PanelEra& era,
                                            std::string_view target, int window = kMomentumWindow,
                                            FeatureCorrCache* cache = nullptr);

// Per-feature momentum signs in {-1, 0, +1} from the same trailing window.
std::vector<int> factor_momentum_signs(std::span<const PanelEra> history, std::string_view target, int window,
                                       FeatureCorrCache* cache = nullptr);

class FactorMomentumModel final : public RankingModel {
public:
    explicit FactorMomentumModel(int window = kMomentumWindow, int lag = kMomentumLag,
                                 std::function<void(EraId)> on_target_read = {});

    void fit(const PanelSet& train, std::string_view target, std::uint64_t seed) override;
    std::vector<double> predict(const PanelEra& era) const override;
    void observe(const PanelEra& resolved) override;
    std::string name() const override { return "factor_momentum"; }

    int window() const noexcept { return window_; }
    int lag() const noexcept { return lag_; }

private:
    int window_;
    int lag_;
    std::string target_;
    std::vector<PanelEra> history_;
    std::function<void(EraId)> on_target_read_;
    mutable std::unique_ptr<FeatureCorrCache> cache_;
};

class GbdtModel final : public RankingModel {
public:
    explicit GbdtModel(BoostConfig cfg, std::size_t prune_first = 0, const PanelSet* validation = nullptr);

    void fit(const PanelSet& train, std::string_view target, std::uint64_t seed) override;
    std::vector<double> predict(const PanelEra& era) const override;
    std::string name() const override { return std::string("gbdt-") + std::string(to_string(cfg_.mode)); }

    const Booster& booster() const noexcept { return booster_; }
    void set_booster(Booster b) { booster_ = std::move(b); }
    const TrainReport& report() const noexcept { return report_; }

private:
    BoostConfig cfg_;
    std::size_t prune_first_;
    const PanelSet* validation_;
    Booster booster_;
    TrainReport report_;
};

enum class EnsembleMode { OverPredictions, OverModels };

std::string_view to_string(EnsembleMode mode);
EnsembleMode ensemble_mode_from_string(std::string_view text);

struct EnsembleSpec {
    EnsembleMode mode = EnsembleMode::OverPredictions;
    int n_seeds = 10;
    std::vector<std::string> targets{"target"};
};

// Element-wise arithmetic mean. Throws ShapeError on length mismatch or empty input.
std::vector<double> average_predictions(std::span<const std::vector<double>> members);

// Mean of each member's summary metrics. Throws ShapeError when era indices differ.
SummaryMetrics average_metrics(std::span<const CorrSeries> members);

// Mean of the per-target models' predictions. Throws ConfigError when a target has no model.
std::vector<double> multi_target_average(const std::map<std::string, const RankingModel*, std::less<>>& models,
                                         std::span<const std::string> targets, const PanelEra& era);

} // namespace tempora
