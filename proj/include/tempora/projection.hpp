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

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

enum class ProjectionKind { Fixed, LowMean, HighMean, LowVol, HighVol };

std::string_view to_string(ProjectionKind kind);
ProjectionKind projection_kind_from_string(std::string_view text);

inline constexpr ProjectionKind kAllProjectionKinds[] = {ProjectionKind::Fixed, ProjectionKind::LowMean,
                                                         ProjectionKind::HighMean, ProjectionKind::LowVol,
                                                         ProjectionKind::HighVol};

struct ProjectionRule {
    ProjectionKind kind = ProjectionKind::LowMean;
    std::size_t k = 420;
    std::vector<std::string> fixed_set; // required iff kind == Fixed
    double beta = 1.0;
    int window = 52;
    int lag = 6;

    void validate(std::size_t n_features) const;
};

// floor(M / 3), at least 1.
std::size_t default_projection_size(std::size_t n_features);

// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kProjectionRtol = 1e-10;

// y - beta * P y, with P the orthogonal projector onto the column space of x.
std::vector<double> project_linear(std::span<const double> y, const Eigen::MatrixXd& x, double beta);

// Columns of the era's feature matrix, as doubles, in the given order.
Eigen::MatrixXd feature_submatrix(const PanelEra& era, std::span<const std::size_t> columns);

// Corr of projected scores with the target.
double fnc(std::span<const double> projected, std::span<const double> target);

struct FeatureCorrStats {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> std; // population
    std::size_t eras_used = 0;
};

// Rolling stats of per-era feature Corr over eras in [t - lag - window + 1, t - lag] found in
// `history`. Reads only those eras. Throws NotReadyError when none carry the target.
FeatureCorrStats feature_corr_stats(std::span<const PanelEra> history, const PanelSchema& schema, std::string_view target,
                                    EraId t, int window, int lag, FeatureCorrCache* cache = nullptr);

// k feature names chosen by the rule; ties broken by feature name. Throws ConfigError if fewer than k.
std::vector<std::string> select_projection_set(const FeatureCorrStats& stats, const ProjectionRule& rule);

struct ProjectedScores {
    std::vector<double> scores;
    std::vector<std::string> projected_features;
    bool projected = false; // false: warm-up fallback, scores returned unchanged
};

// Projects y against the rule's feature set for this era. Without stats (warm-up), non-fixed
// rules return y unchanged with projected = false.
ProjectedScores dynamic_project(std::span<const double> y, const PanelEra& era, const PanelSchema& schema,
                                const ProjectionRule& rule, const std::optional<FeatureCorrStats>& stats);

} // namespace tempora
