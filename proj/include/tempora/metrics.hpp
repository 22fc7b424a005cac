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

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

struct CorrPoint {
    EraId era;
    double value = 0.0;

    friend bool operator==(const CorrPoint&, const CorrPoint&) = default;
};

// Per-era scores, strictly increasing in era.
using CorrSeries = std::vector<CorrPoint>;

struct SummaryMetrics {
    double mean = 0.0;
    double volatility = 0.0;   // population standard deviation
    double max_drawdown = 0.0; // on the cumulative-sum path, starting from 0
    double sharpe = 0.0;
    double calmar = 0.0;       // +inf when max_drawdown == 0
};

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Ranks mapped to (r - 0.5) / N.
std::vector<double> rank_normalize(std::span<const double> scores);

// Pearson correlation of rank-normalized scores with the raw target.
// Throws UndefinedMetricError for a constant target; constant scores give 0.
double era_corr(std::span<const double> scores, std::span<const double> target);

// Same, with integer feature values as scores.
double era_corr(std::span<const std::int8_t> feature, std::span<const double> target);

std::vector<double> values_of(const CorrSeries& series);

double max_drawdown(std::span<const double> values);

// Throws when fewer than 2 values or when volatility is 0 (Sharpe undefined).
SummaryMetrics summarize(std::span<const double> values);
SummaryMetrics summarize(const CorrSeries& series);

// Summary computed from given mean, volatility and drawdown.
SummaryMetrics summary_from(double mean, double volatility, double max_drawdown);

// Per-era Corr of every feature column with one target, computed on first use per era.
// `on_target_read` fires whenever an era's target is read to fill the cache.
class FeatureCorrCache {
public:
    explicit FeatureCorrCache(std::string target, std::function<void(EraId)> on_target_read = {})
        : target_(std::move(target)), on_target_read_(std::move(on_target_read)) {}

    const std::string& target() const noexcept { return target_; }

    // Throws DataError when the era lacks the target.
    const std::vector<double>& get(const PanelEra& era);

private:
    std::string target_;
    std::function<void(EraId)> on_target_read_;
    std::map<EraId, std::vector<double>> cache_;
};

enum class Regime { High, Low, Undefined };

std::string_view to_string(Regime regime);

struct RegimeLabel {
    EraId era;
    Regime label = Regime::Undefined;
};

struct NrvixPoint {
    EraId era;
    std::optional<double> value;
};

inline constexpr int kNrvixWindow = 52;
inline constexpr double kNrvixThreshold = 0.025;

// Rolling population std of the trailing `window` values; undefined until the window fills.
std::vector<NrvixPoint> nrvix(const CorrSeries& nmi, int window = kNrvixWindow);

// High iff value > threshold.
Regime classify_regime(std::optional<double> nrvix_value, double threshold = kNrvixThreshold);

std::vector<RegimeLabel> classify_regimes(std::span<const NrvixPoint> nrvix_series,
                                          double threshold = kNrvixThreshold);

// Summaries over all eras and over the high / low subsets. A subset whose summary
// is undefined (empty, too short, zero volatility) is omitted.
struct RegimeReport {
    SummaryMetrics all;
    std::optional<SummaryMetrics> high;
    std::optional<SummaryMetrics> low;
};

RegimeReport regime_report(const CorrSeries& series, std::span<const RegimeLabel> labels);

// Numerai-market-index analog: per-era Corr of the factor-momentum baseline. Eras
// without a target, or before the baseline has lagged history, are omitted.
CorrSeries nmi_series(const PanelSet& panel, std::string_view target, int window = 52, int lag = 6);

} // namespace tempora
