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

#include "tempora/cv_split.hpp"
#include "tempora/data_io.hpp"
#include "tempora/feature_eng.hpp"
#include "tempora/gbdt.hpp"
#include "tempora/metrics.hpp"
#include "tempora/model_api.hpp"
#include "tempora/online_select.hpp"
#include "tempora/projection.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

enum class ModelKind { Gbdt, FactorMomentum };

// One hyperparameter's candidate values; names match BoostConfig fields.
struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    std::vector<SweepAxis> grid;
    std::size_t random_subsample = 0; // 0 = every cell

    // Throws ConfigError when a value lies outside the allowed range for its hyperparameter.
    void validate() const;
};

struct RunConfig {
    std::optional<std::filesystem::path> data_path;
    std::optional<SyntheticConfig> synthetic;
    std::optional<GroupedSplitSpec> split; // unset: proportional split of the panel
    FeatureEngConfig fe;
    ModelKind model = ModelKind::Gbdt;
    BoostConfig boost;
    bool min_data_in_leaf_auto = true;
    std::size_t prune_first = 0;
    EnsembleSpec ensemble;
    std::optional<ProjectionRule> projection;
    bool projection_k_auto = true;
    std::optional<SelectionConfig> selection;
    SweepSpec sweep;
    int regime_window = kNrvixWindow;
    std::optional<double> regime_threshold = kNrvixThreshold; // unset: calibrate on pre-test eras
    int momentum_window = kMomentumWindow;
    int momentum_lag = kMomentumLag;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    unsigned workers = 1;

    const std::string& main_target() const { return ensemble.targets.front(); }
};

// Parses the JSON run-config document; relative paths resolve against base_dir.
// Unknown keys are ConfigErrors.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// 50% train, 20% validation, the rest test, with gaps of max(1, 3% of eras).
GroupedSplitSpec proportional_split(const PanelSet& panel);

enum class Subcommand { Generate, Train, Backtest, Sweep, Report };

Subcommand subcommand_from_string(std::string_view text);

struct AuditEvent {
    enum class Kind { Emit, TargetRead };
    Kind kind;
    EraId era;
};

// Records prediction emission and target reads of the scoring target during a backtest.
struct AuditLog {
    std::vector<AuditEvent> events;
};

struct BacktestResult {
    PredictionSet predictions;
    CorrSeries scores;
    std::vector<RegimeLabel> labels;
    RegimeReport report;
    std::vector<std::string> method_names;   // when selection is enabled
    std::vector<std::vector<double>> weights; // per test era, when selection is enabled
    std::vector<CorrSeries> member_scores;    // per ensemble member
    std::optional<SummaryMetrics> over_models; // when mode is over_models
    double regime_threshold = kNrvixThreshold;
};

PanelSet load_panel(const RunConfig& cfg);

BacktestResult run_backtest(const PanelSet& panel, const RunConfig& cfg, AuditLog* audit = nullptr);

struct SweepRow {
    std::size_t cell = 0;
    std::vector<double> values; // aligned with SweepSpec::grid
    std::optional<SummaryMetrics> validation;
    double sharpe() const;
};

// Rows sorted by validation Sharpe, descending; undefined Sharpe sorts last.
std::vector<SweepRow> run_sweep(const PanelSet& panel, const RunConfig& cfg);

// Runs a subcommand and writes its artifacts to cfg.output_dir. Returns 0; throws Error on failure.
int run(Subcommand cmd, const RunConfig& cfg, std::ostream& out);

// CLI front door: maps errors to exit codes (2 config, 3 data, 4 runtime) with diagnostics on err.
int run_cli(std::string_view subcommand, const std::filesystem::path& config_path,
            const std::optional<std::filesystem::path>& out_dir, const std::optional<std::uint64_t>& seed,
            std::ostream& out, std::ostream& err);

void write_summary_csv(std::ostream& out, const RegimeReport& report);
void write_summary_block(std::ostream& out, const RegimeReport& report);

} // namespace tempora
