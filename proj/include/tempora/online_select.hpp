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

#include "tempora/metrics.hpp"
#include "tempora/panel.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

enum class SelectionKind { Average, Momentum, Sharpe, Calmar };

std::string_view to_string(SelectionKind kind);
SelectionKind selection_kind_from_string(std::string_view text);

struct SelectionConfig {
    SelectionKind kind = SelectionKind::Momentum;
    int warm_up = 52; // scored lagged eras required before the rule applies
    int window = 52;
    int lag = 6;

    void validate() const;
};

// Realized per-era Corr of each method, on a shared strictly increasing era index.
class MethodHistory {
public:
    explicit MethodHistory(std::vector<std::string> names);

    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t method_count() const noexcept { return names_.size(); }
    const std::vector<EraId>& eras() const noexcept { return eras_; }
    const CorrSeries& series(std::size_t method) const { return series_.at(method); }

    // Appends one era's realized scores, one per method. Throws ShapeError if out of order.
    void append(EraId era, std::span<const double> scores);

private:
    std::vector<std::string> names_;
    std::vector<EraId> eras_;
    std::vector<CorrSeries> series_;
};

// Ratio used to rank methods: mean / std for Sharpe, mean / max_drawdown for Calmar.
// A zero denominator ranks as +inf for a positive mean, -inf for a negative one, 0 otherwise.
double ranking_ratio(double mean, double denominator);

// Weights over methods for era t, from eras <= t - lag only. Non-negative, summing to 1.
std::vector<double> select_method(const MethodHistory& history, EraId t, const SelectionConfig& cfg);

struct OnlineEnsembleResult {
    CorrSeries combined;
    std::vector<std::vector<double>> weights; // per era
    std::vector<std::vector<double>> combined_predictions; // per era
};

// Weighted combination of one era's method predictions. Equal weights reduce to the plain mean.
std::vector<double> combine_predictions(std::span<const std::vector<double>> predictions, std::span<const double> weights);

// Per-era predictions of one method: predictions[e] are the scores for eras[e].
using MethodPredictions = std::vector<std::vector<double>>;

// Sequential online combination: weights from lagged history, weighted-average prediction,
// Corr against the target, then each method's realized Corr is appended to history.
OnlineEnsembleResult run_online_ensemble(std::span<const std::string> names, std::span<const MethodPredictions> methods,
                                         std::span<const EraId> eras, std::span<const std::vector<double>> targets,
                                         const SelectionConfig& cfg);

// Index of the single weighted method, or nullopt when weights are spread.
std::optional<std::size_t> chosen_method(std::span<const double> weights);

} // namespace tempora
