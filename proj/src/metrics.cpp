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

#include "tempora/metrics.hpp"

#include "tempora/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tempora {

std::vector<double> average_ranks(std::span<const double> values)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) {
            ++j;
        }
        // positions i..j-1 (0-based) share rank mean((i+1)..j)
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

std::vector<double> rank_normalize(std::span<const double> scores)
{
    auto ranks = average_ranks(scores);
    const double n = static_cast<double>(scores.size());
    for (auto& r : ranks) {
        r = (r - 0.5) / n;
    }
    return ranks;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        return 0.0;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void check_corr_inputs(std::size_t scores, std::span<const double> target)
{
    if (scores != target.size()) {
        throw ShapeError("era_corr: " + std::to_string(scores) + " scores for " + std::to_string(target.size()) +
                         " targets");
    }
    if (scores < 2) {
        throw UndefinedMetricError("era_corr needs at least 2 rows");
    }
    if (std::all_of(target.begin(), target.end(), [&](double v) { return v == target[0]; })) {
        throw UndefinedMetricError("era_corr: constant target");
    }
}

} // namespace

double era_corr(std::span<const double> scores, std::span<const double> target)
{
    check_corr_inputs(scores.size(), target);
    const auto ranked = rank_normalize(scores);
    return pearson(ranked, target);
}

double era_corr(std::span<const std::int8_t> feature, std::span<const double> target)
{
    std::vector<double> scores(feature.begin(), feature.end());
    return era_corr(scores, target);
}

std::vector<double> values_of(const CorrSeries& series)
{
    std::vector<double> v;
    v.reserve(series.size());
    for (const auto& p : series) {
        v.push_back(p.value);
    }
    return v;
}

double max_drawdown(std::span<const double> values)
{
    double cumulative = 0.0;
    double peak = 0.0;
    double drawdown = 0.0;
    for (double v : values) {
        cumulative += v;
        peak = std::max(peak, cumulative);
        drawdown = std::max(drawdown, peak - cumulative);
    }
    return drawdown;
}

SummaryMetrics summary_from(double mean, double volatility, double max_dd)
{
    SummaryMetrics s;
    s.mean = mean;
    s.volatility = volatility;
    s.max_drawdown = max_dd;
    if (volatility <= 0.0) {
        throw UndefinedMetricError("Sharpe undefined: zero volatility");
    }
    s.sharpe = mean / volatility;
    s.calmar = max_dd > 0.0 ? mean / max_dd : std::numeric_limits<double>::infinity();
    return s;
}

SummaryMetrics summarize(std::span<const double> values)
{
    if (values.size() < 2) {
        throw UndefinedMetricError("summary needs at least 2 eras, got " + std::to_string(values.size()));
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return summary_from(mean, std::sqrt(ss / n), max_drawdown(values));
}

SummaryMetrics summarize(const CorrSeries& series)
{
    const auto v = values_of(series);
    return summarize(std::span<const double>(v));
}

const std::vector<double>& FeatureCorrCache::get(const PanelEra& era)
{
    auto it = cache_.find(era.era);
    if (it != cache_.end()) {
        return it->second;
    }
    if (on_target_read_) {
        on_target_read_(era.era);
    }
    const auto target = target_values(era, target_);
    std::vector<double> corr(era.features.cols(), 0.0);
    const bool defined = std::any_of(target.begin(), target.end(), [&](double v) { return v != target[0]; });
    if (defined && target.size() >= 2) {
        for (std::size_t c = 0; c < corr.size(); ++c) {
            corr[c] = era_corr(era.features.column(c), target);
        }
    }
    return cache_.emplace(era.era, std::move(corr)).first->second;
}

std::string_view to_string(Regime regime)
{
    switch (regime) {
    case Regime::High:
        return "high";
    case Regime::Low:
        return "low";
    case Regime::Undefined:
        break;
    }
    return "undefined";
}

std::vector<NrvixPoint> nrvix(const CorrSeries& nmi, int window)
{
    if (window < 1) {
        throw ConfigError("NRVIX window must be >= 1");
    }
    const auto w = static_cast<std::size_t>(window);
    std::vector<NrvixPoint> out;
    out.reserve(nmi.size());
    for (std::size_t i = 0; i < nmi.size(); ++i) {
        NrvixPoint p{nmi[i].era, std::nullopt};
        if (i + 1 >= w) {
            double mean = 0.0;
            for (std::size_t j = i + 1 - w; j <= i; ++j) {
                mean += nmi[j].value;
            }
            mean /= static_cast<double>(w);
            double ss = 0.0;
            for (std::size_t j = i + 1 - w; j <= i; ++j) {
                ss += (nmi[j].value - mean) * (nmi[j].value - mean);
            }
            p.value = std::sqrt(ss / static_cast<double>(w));
        }
        out.push_back(p);
    }
    return out;
}

Regime classify_regime(std::optional<double> nrvix_value, double threshold)
{
    if (!nrvix_value) {
        return Regime::Undefined;
    }
    return *nrvix_value > threshold ? Regime::High : Regime::Low;
}

std::vector<RegimeLabel> classify_regimes(std::span<const NrvixPoint> nrvix_series, double threshold)
{
    std::vector<RegimeLabel> out;
    out.reserve(nrvix_series.size());
    for (const auto& p : nrvix_series) {
        out.push_back({p.era, classify_regime(p.value, threshold)});
    }
    return out;
}

namespace {

std::optional<SummaryMetrics> try_summarize(const std::vector<double>& values)
{
    try {
        return summarize(std::span<const double>(values));
    } catch (const UndefinedMetricError&) {
        return std::nullopt;
    }
}

} // namespace

RegimeReport regime_report(const CorrSeries& series, std::span<const RegimeLabel> labels)
{
    std::vector<double> high;
    std::vector<double> low;
    std::size_t li = 0;
    for (const auto& p : series) {
        while (li < labels.size() && labels[li].era < p.era) {
            ++li;
        }
        if (li == labels.size() || labels[li].era != p.era) {
            throw ShapeError("no regime label for era " + std::to_string(p.era.index));
        }
        if (labels[li].label == Regime::High) {
            high.push_back(p.value);
        } else if (labels[li].label == Regime::Low) {
            low.push_back(p.value);
        }
    }
    RegimeReport report;
    report.all = summarize(series);
    report.high = try_summarize(high);
    report.low = try_summarize(low);
    return report;
}

} // namespace tempora
