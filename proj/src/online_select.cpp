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

#include "tempora/online_select.hpp"

#include "tempora/error.hpp"
#include "tempora/model_api.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tempora {

std::string_view to_string(SelectionKind kind)
{
    switch (kind) {
    case SelectionKind::Average:
        return "average";
    case SelectionKind::Momentum:
        return "momentum";
    case SelectionKind::Sharpe:
        return "sharpe";
    case SelectionKind::Calmar:
        return "calmar";
    }
    return "average";
}

SelectionKind selection_kind_from_string(std::string_view text)
{
    for (auto k : {SelectionKind::Average, SelectionKind::Momentum, SelectionKind::Sharpe, SelectionKind::Calmar}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw ConfigError("unknown selection rule '" + std::string(text) + "'");
}

void SelectionConfig::validate() const
{
    if (warm_up < 1 || window < 1 || lag < 0) {
        throw ConfigError("selection needs warm_up >= 1, window >= 1, lag >= 0");
    }
}

MethodHistory::MethodHistory(std::vector<std::string> names) : names_(std::move(names)), series_(names_.size())
{
    if (names_.empty()) {
        throw ConfigError("model selection needs at least one method");
    }
}

void MethodHistory::append(EraId era, std::span<const double> scores)
{
    if (scores.size() != names_.size()) {
        throw ShapeError("history append: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(names_.size()) + " methods");
    }
    if (!eras_.empty() && !(eras_.back() < era)) {
        throw ShapeError("history append: era " + std::to_string(era.index) + " not after " +
                         std::to_string(eras_.back().index));
    }
    eras_.push_back(era);
    for (std::size_t m = 0; m < scores.size(); ++m) {
        series_[m].push_back({era, scores[m]});
    }
}

double ranking_ratio(double mean, double denominator)
{
    if (denominator > 0.0) {
        return mean / denominator;
    }
    if (mean > 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    if (mean < 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

std::vector<double> select_method(const MethodHistory& history, EraId t, const SelectionConfig& cfg)
{
    cfg.validate();
    const std::size_t k = history.method_count();
    std::vector<double> equal(k, 1.0 / static_cast<double>(k));
    if (cfg.kind == SelectionKind::Average) {
        return equal;
    }
    const auto& eras = history.eras();
    const EraId cutoff{t.index - cfg.lag};
    std::size_t usable = 0;
    while (usable < eras.size() && !(cutoff < eras[usable]) && eras[usable] < t) {
        ++usable;
    }
    if (usable < static_cast<std::size_t>(cfg.warm_up)) {
        return equal;
    }
    const std::size_t first = usable > static_cast<std::size_t>(cfg.window) ? usable - static_cast<std::size_t>(cfg.window) : 0;
    const std::size_t n = usable - first;

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < k; ++m) {
        const auto& s = history.series(m);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = s[first + i].value;
        }
        double mean = 0.0;
        for (double x : v) {
            mean += x;
        }
        mean /= static_cast<double>(n);
        double score = mean;
        if (cfg.kind == SelectionKind::Sharpe) {
            double ss = 0.0;
            for (double x : v) {
                ss += (x - mean) * (x - mean);
            }
            score = ranking_ratio(mean, std::sqrt(ss / static_cast<double>(n)));
        } else if (cfg.kind == SelectionKind::Calmar) {
            score = ranking_ratio(mean, max_drawdown(v));
        }
        if (m == 0 || score > best_score) {
            best = m;
            best_score = score;
        }
    }
    std::vector<double> w(k, 0.0);
    w[best] = 1.0;
    return w;
}

std::vector<double> combine_predictions(std::span<const std::vector<double>> predictions, std::span<const double> weights)
{
    if (predictions.size() != weights.size() || predictions.empty()) {
        throw ShapeError("combine_predictions: one weight per method required");
    }
    if (std::all_of(weights.begin(), weights.end(), [&](double x) { return x == weights.front(); })) {
        return average_predictions(predictions);
    }
    const std::size_t n = predictions.front().size();
    std::vector<double> combined(n, 0.0);
    for (std::size_t m = 0; m < predictions.size(); ++m) {
        if (predictions[m].size() != n) {
            throw ShapeError("combine_predictions: prediction lengths differ");
        }
        if (weights[m] == 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            combined[i] += weights[m] * predictions[m][i];
        }
    }
    return combined;
}

std::optional<std::size_t> chosen_method(std::span<const double> weights)
{
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 1.0) {
            return i;
        }
    }
    if (weights.size() == 1) {
        return 0;
    }
    return std::nullopt;
}

OnlineEnsembleResult run_online_ensemble(std::span<const std::string> names, std::span<const MethodPredictions> methods,
                                         std::span<const EraId> eras, std::span<const std::vector<double>> targets,
                                         const SelectionConfig& cfg)
{
    if (methods.empty() || names.size() != methods.size()) {
        throw ConfigError("online ensemble needs one name per method and at least one method");
    }
    if (targets.size() != eras.size()) {
        throw ShapeError("online ensemble: targets and eras differ in length");
    }
    for (const auto& m : methods) {
        if (m.size() != eras.size()) {
            throw ShapeError("online ensemble: a method does not cover every era");
        }
    }
    MethodHistory history(std::vector<std::string>(names.begin(), names.end()));
    OnlineEnsembleResult out;
    std::vector<double> realized(methods.size());
    for (std::size_t e = 0; e < eras.size(); ++e) {
        const auto w = select_method(history, eras[e], cfg);
        const std::size_t n = targets[e].size();
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (methods[m][e].size() != n) {
                throw ShapeError("online ensemble: prediction length mismatch in era " + std::to_string(eras[e].index));
            }
        }
        std::vector<std::vector<double>> members;
        members.reserve(methods.size());
        for (const auto& m : methods) {
            members.push_back(m[e]);
        }
        auto combined = combine_predictions(members, w);
        out.combined.push_back({eras[e], era_corr(combined, targets[e])});
        for (std::size_t m = 0; m < methods.size(); ++m) {
            realized[m] = era_corr(methods[m][e], targets[e]);
        }
        history.append(eras[e], realized);
        out.weights.push_back(w);
        out.combined_predictions.push_back(std::move(combined));
    }
    return out;
}

} // namespace tempora
