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

#include "tempora/projection.hpp"

#include "tempora/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tempora {

std::string_view to_string(ProjectionKind kind)
{
    switch (kind) {
    case ProjectionKind::Fixed:
        return "fixed";
    case ProjectionKind::LowMean:
        return "low_mean";
    case ProjectionKind::HighMean:
        return "high_mean";
    case ProjectionKind::LowVol:
        return "low_vol";
    case ProjectionKind::HighVol:
        return "high_vol";
    }
    return "fixed";
}

ProjectionKind projection_kind_from_string(std::string_view text)
{
    for (auto k : kAllProjectionKinds) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw ConfigError("unknown projection rule '" + std::string(text) + "'");
}

void ProjectionRule::validate(std::size_t n_features) const
{
    if (kind == ProjectionKind::Fixed) {
        if (fixed_set.empty()) {
            throw ConfigError("fixed projection needs a feature list");
        }
    } else if (k > n_features) {
        throw ConfigError("projection size k = " + std::to_string(k) + " exceeds " + std::to_string(n_features) +
                          " features");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw ConfigError("projection beta must lie in [0, 1]");
    }
    if (window < 1 || lag < 0) {
        throw ConfigError("projection needs window >= 1 and lag >= 0");
    }
}

std::size_t default_projection_size(std::size_t n_features)
{
    return std::max<std::size_t>(1, n_features / 3);
}

std::vector<double> project_linear(std::span<const double> y, const Eigen::MatrixXd& x, double beta)
{
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ShapeError("project_linear: " + std::to_string(y.size()) + " scores, " + std::to_string(x.rows()) +
                         " feature rows");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw ConfigError("project_linear: beta must lie in [0, 1]");
    }
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }) || !x.allFinite()) {
        throw DataError("project_linear: non-finite input");
    }
    std::vector<double> out(y.begin(), y.end());
    if (x.cols() == 0 || x.rows() == 0 || beta == 0.0) {
        return out;
    }
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) {
        return out;
    }
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > kProjectionRtol * s(0)) {
        ++rank;
    }
    const auto u = svd.matrixU().leftCols(rank);
    const Eigen::VectorXd py = u * (u.transpose() * yv);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= beta * py(static_cast<Eigen::Index>(i));
    }
    return out;
}

Eigen::MatrixXd feature_submatrix(const PanelEra& era, std::span<const std::size_t> columns)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(era.rows()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] >= era.features.cols()) {
            throw ShapeError("feature column " + std::to_string(columns[j]) + " out of range");
        }
        const auto col = era.features.column(columns[j]);
        for (std::size_t i = 0; i < col.size(); ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
        }
    }
    return x;
}

double fnc(std::span<const double> projected, std::span<const double> target)
{
    return era_corr(projected, target);
}

FeatureCorrStats feature_corr_stats(std::span<const PanelEra> history, const PanelSchema& schema, std::string_view target,
                                    EraId t, int window, int lag, FeatureCorrCache* cache)
{
    if (window < 1 || lag < 0) {
        throw ConfigError("feature stats need window >= 1 and lag >= 0");
    }
    const int last = t.index - lag;
    const int first = last - window + 1;
    FeatureCorrCache local{std::string(target)};
    FeatureCorrCache& c = cache != nullptr ? *cache : local;
    const std::size_t m = schema.feature_count();
    FeatureCorrStats stats;
    stats.names = schema.feature_names;
    stats.mean.assign(m, 0.0);
    stats.std.assign(m, 0.0);
    std::vector<const std::vector<double>*> rows;
    for (const auto& era : history) {
        if (era.era.index < first || era.era.index > last || era.target(target) == nullptr) {
            continue;
        }
        rows.push_back(&c.get(era));
    }
    if (rows.empty()) {
        throw NotReadyError("no lagged eras with target '" + std::string(target) + "' before era " +
                            std::to_string(t.index));
    }
    const double n = static_cast<double>(rows.size());
    for (const auto* r : rows) {
        if (r->size() != m) {
            throw ShapeError("feature Corr row has " + std::to_string(r->size()) + " features, schema " +
                             std::to_string(m));
        }
        for (std::size_t f = 0; f < m; ++f) {
            stats.mean[f] += (*r)[f];
        }
    }
    for (auto& v : stats.mean) {
        v /= n;
    }
    for (const auto* r : rows) {
        for (std::size_t f = 0; f < m; ++f) {
            const double d = (*r)[f] - stats.mean[f];
            stats.std[f] += d * d;
        }
    }
    for (auto& v : stats.std) {
        v = std::sqrt(v / n);
    }
    stats.eras_used = rows.size();
    return stats;
}

std::vector<std::string> select_projection_set(const FeatureCorrStats& stats, const ProjectionRule& rule)
{
    if (rule.kind == ProjectionKind::Fixed) {
        return rule.fixed_set;
    }
    const std::size_t m = stats.names.size();
    if (rule.k > m) {
        throw ConfigError("cannot select " + std::to_string(rule.k) + " of " + std::to_string(m) + " features");
    }
    const auto& key = (rule.kind == ProjectionKind::LowMean || rule.kind == ProjectionKind::HighMean) ? stats.mean
                                                                                                    : stats.std;
    const bool ascending = rule.kind == ProjectionKind::LowMean || rule.kind == ProjectionKind::LowVol;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (key[a] != key[b]) {
            return ascending ? key[a] < key[b] : key[a] > key[b];
        }
        return stats.names[a] < stats.names[b];
    });
    std::vector<std::string> out;
    out.reserve(rule.k);
    for (std::size_t i = 0; i < rule.k; ++i) {
        out.push_back(stats.names[order[i]]);
    }
    return out;
}

ProjectedScores dynamic_project(std::span<const double> y, const PanelEra& era, const PanelSchema& schema,
                                const ProjectionRule& rule, const std::optional<FeatureCorrStats>& stats)
{
    ProjectedScores out;
    if (rule.kind != ProjectionKind::Fixed && !stats) {
        out.scores.assign(y.begin(), y.end());
        return out;
    }
    out.projected_features = rule.kind == ProjectionKind::Fixed ? rule.fixed_set : select_projection_set(*stats, rule);
    std::vector<std::size_t> cols;
    cols.reserve(out.projected_features.size());
    for (const auto& name : out.projected_features) {
        const auto idx = schema.feature_index(name);
        if (!idx) {
            throw ConfigError("projection feature '" + name + "' not in schema");
        }
        cols.push_back(*idx);
    }
    out.scores = project_linear(y, feature_submatrix(era, cols), rule.beta);
    out.projected = true;
    return out;
}

} // namespace tempora
