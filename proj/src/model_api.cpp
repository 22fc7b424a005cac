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

#include "tempora/model_api.hpp"

#include "tempora/error.hpp"

#include <algorithm>
#include <cmath>

namespace tempora {

std::vector<int> factor_momentum_signs(std::span<const PanelEra> history, std::string_view target, int window,
                                       FeatureCorrCache* cache)
{
    if (window < 1) {
        throw ConfigError("momentum window must be >= 1");
    }
    std::vector<const PanelEra*> usable;
    for (auto it = history.rbegin(); it != history.rend() && usable.size() < static_cast<std::size_t>(window); ++it) {
        if (it->target(target) != nullptr) {
            usable.push_back(&*it);
        }
    }
    if (usable.empty()) {
        throw NotReadyError("factor momentum: no lagged history with target '" + std::string(target) + "'");
    }
    std::reverse(usable.begin(), usable.end());
    const std::size_t m = usable.front()->features.cols();
    std::vector<double> mean(m, 0.0);
    FeatureCorrCache local{std::string(target)};
    FeatureCorrCache& c = cache != nullptr ? *cache : local;
    for (const auto* era : usable) {
        const auto& corr = c.get(*era);
        for (std::size_t f = 0; f < m; ++f) {
            mean[f] += corr[f];
        }
    }
    std::vector<int> signs(m);
    for (std::size_t f = 0; f < m; ++f) {
        mean[f] /= static_cast<double>(usable.size());
        signs[f] = mean[f] > 0.0 ? 1 : (mean[f] < 0.0 ? -1 : 0);
    }
    return signs;
}

std::vector<double> factor_momentum_predict(std::span<const PanelEra> history, const PanelEra& era,
                                            std::string_view target, int window, FeatureCorrCache* cache)
{
    const auto signs = factor_momentum_signs(history, target, window, cache);
    if (signs.size() != era.features.cols()) {
        throw ShapeError("factor momentum: history has " + std::to_string(signs.size()) + " features, era has " +
                         std::to_string(era.features.cols()));
    }
    std::vector<double> scores(era.rows(), 0.0);
    for (std::size_t f = 0; f < signs.size(); ++f) {
        if (signs[f] == 0) {
            continue;
        }
        const auto col = era.features.column(f);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            scores[i] += signs[f] * col[i];
        }
    }
    return scores;
}

FactorMomentumModel::FactorMomentumModel(int window, int lag, std::function<void(EraId)> on_target_read)
    : window_(window), lag_(lag), on_target_read_(std::move(on_target_read)),
      cache_(std::make_unique<FeatureCorrCache>("", on_target_read_))
{
    if (window < 1 || lag < 0) {
        throw ConfigError("factor momentum needs window >= 1 and lag >= 0");
    }
}

void FactorMomentumModel::fit(const PanelSet& train, std::string_view target, std::uint64_t /*seed*/)
{
    target_ = std::string(target);
    history_.clear();
    for (const auto& era : train.eras) {
        if (era.target(target) != nullptr) {
            history_.push_back(era);
        }
    }
    cache_ = std::make_unique<FeatureCorrCache>(target_, on_target_read_);
}

void FactorMomentumModel::observe(const PanelEra& resolved)
{
    if (resolved.target(target_) == nullptr) {
        return;
    }
    if (!history_.empty() && !(history_.back().era < resolved.era)) {
        return;
    }
    history_.push_back(resolved);
}

std::vector<double> FactorMomentumModel::predict(const PanelEra& era) const
{
    const EraId cutoff{era.era.index - lag_};
    const auto end = std::upper_bound(history_.begin(), history_.end(), cutoff,
                                      [](EraId id, const PanelEra& e) { return id < e.era; });
    const std::span<const PanelEra> lagged(history_.data(), static_cast<std::size_t>(end - history_.begin()));
    return factor_momentum_predict(lagged, era, target_, window_, cache_.get());
}

GbdtModel::GbdtModel(BoostConfig cfg, std::size_t prune_first, const PanelSet* validation)
    : cfg_(cfg), prune_first_(prune_first), validation_(validation)
{
    cfg_.validate();
}

void GbdtModel::fit(const PanelSet& train_panel, std::string_view target, std::uint64_t seed)
{
    BoostConfig cfg = cfg_;
    cfg.seed = seed;
    booster_ = train(train_panel, target, cfg, validation_, &report_);
    if (prune_first_ > booster_.trees.size() / 2) {
        throw ConfigError("prune_first " + std::to_string(prune_first_) + " exceeds half of the " +
                          std::to_string(booster_.trees.size()) + " trained trees");
    }
}

std::vector<double> GbdtModel::predict(const PanelEra& era) const
{
    return booster_.predict(era, prune_first_);
}

std::string_view to_string(EnsembleMode mode)
{
    return mode == EnsembleMode::OverModels ? "over_models" : "over_predictions";
}

EnsembleMode ensemble_mode_from_string(std::string_view text)
{
    if (text == "over_predictions" || text == "over-predictions") {
        return EnsembleMode::OverPredictions;
    }
    if (text == "over_models" || text == "over-models") {
        return EnsembleMode::OverModels;
    }
    throw ConfigError("unknown ensemble mode '" + std::string(text) + "'");
}

std::vector<double> average_predictions(std::span<const std::vector<double>> members)
{
    if (members.empty()) {
        throw ShapeError("average_predictions: no members");
    }
    const std::size_t n = members.front().size();
    std::vector<double> out(n, 0.0);
    for (const auto& m : members) {
        if (m.size() != n) {
            throw ShapeError("average_predictions: member lengths differ (" + std::to_string(m.size()) + " vs " +
                             std::to_string(n) + ")");
        }
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += m[i];
        }
    }
    const double k = static_cast<double>(members.size());
    for (auto& v : out) {
        v /= k;
    }
    return out;
}

SummaryMetrics average_metrics(std::span<const CorrSeries> members)
{
    if (members.empty()) {
        throw ShapeError("average_metrics: no members");
    }
    SummaryMetrics out{};
    for (const auto& series : members) {
        if (series.size() != members.front().size()) {
            throw ShapeError("average_metrics: members cover different eras");
        }
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (series[i].era != members.front()[i].era) {
                throw ShapeError("average_metrics: era " + std::to_string(series[i].era.index) +
                                 " misaligned with " + std::to_string(members.front()[i].era.index));
            }
        }
        const auto s = summarize(series);
        out.mean += s.mean;
        out.volatility += s.volatility;
        out.max_drawdown += s.max_drawdown;
        out.sharpe += s.sharpe;
        out.calmar += s.calmar;
    }
    const double k = static_cast<double>(members.size());
    out.mean /= k;
    out.volatility /= k;
    out.max_drawdown /= k;
    out.sharpe /= k;
    out.calmar /= k;
    return out;
}

std::vector<double> multi_target_average(const std::map<std::string, const RankingModel*, std::less<>>& models,
                                         std::span<const std::string> targets, const PanelEra& era)
{
    std::vector<std::vector<double>> preds;
    for (const auto& t : targets) {
        const auto it = models.find(t);
        if (it == models.end() || it->second == nullptr) {
            throw ConfigError("no fitted model for target '" + t + "'");
        }
        preds.push_back(it->second->predict(era));
    }
    return average_predictions(preds);
}

CorrSeries nmi_series(const PanelSet& panel, std::string_view target, int window, int lag)
{
    FeatureCorrCache cache{std::string(target)};
    CorrSeries out;
    for (const auto& era : panel.eras) {
        const auto* y = era.target(target);
        if (y == nullptr) {
            continue;
        }
        const auto history = panel.up_to(EraId{era.era.index - lag});
        std::vector<double> scores;
        try {
            scores = factor_momentum_predict(history, era, target, window, &cache);
        } catch (const NotReadyError&) {
            continue;
        }
        try {
            out.push_back({era.era, era_corr(scores, *y)});
        } catch (const UndefinedMetricError&) {
            continue;
        }
    }
    return out;
}

} // namespace tempora
