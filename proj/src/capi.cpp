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

#include "tempora/tempora.h"

#include "tempora/data_io.hpp"
#include "tempora/error.hpp"
#include "tempora/gbdt.hpp"
#include "tempora/metrics.hpp"
#include "tempora/pipeline.hpp"
#include "tempora/projection.hpp"

#include <iostream>
#include <string>

struct tempora_panel {
    tempora::PanelSet panel;
};

struct tempora_booster {
    tempora::Booster booster;
};

namespace {

thread_local std::string g_last_error;

template <class F>
tempora_status guarded(F&& fn)
{
    g_last_error.clear();
    try {
        fn();
        return TEMPORA_OK;
    } catch (const tempora::Error& e) {
        g_last_error = e.what();
        return static_cast<tempora_status>(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return TEMPORA_E_RUNTIME;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TEMPORA_E_RUNTIME;
    }
}

tempora_status argument_error(const char* what)
{
    g_last_error = what;
    return TEMPORA_E_ARGUMENT;
}

} // namespace

extern "C" {

const char* tempora_last_error(void)
{
    return g_last_error.c_str();
}

tempora_status tempora_panel_read(const char* path, tempora_panel** out)
{
    if (path == nullptr || out == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] { *out = new tempora_panel{tempora::read_panel_csv(path)}; });
}

tempora_status tempora_panel_generate(int n_eras, int n_features, int stocks_per_era, uint64_t seed,
                                      tempora_panel** out)
{
    if (out == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] {
        tempora::SyntheticConfig cfg;
        cfg.n_eras = n_eras;
        cfg.n_features = n_features;
        cfg.stocks_min = stocks_per_era;
        cfg.stocks_max = stocks_per_era;
        cfg.seed = seed;
        cfg.regime_schedule = tempora::default_regime_schedule(cfg.n_factors);
        *out = new tempora_panel{tempora::generate_synthetic(cfg)};
    });
}

tempora_status tempora_panel_write(const tempora_panel* panel, const char* path)
{
    if (panel == nullptr || path == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] { tempora::write_panel_csv(std::filesystem::path(path), panel->panel); });
}

size_t tempora_panel_era_count(const tempora_panel* panel)
{
    return panel == nullptr ? 0 : panel->panel.eras.size();
}

size_t tempora_panel_feature_count(const tempora_panel* panel)
{
    return panel == nullptr ? 0 : panel->panel.schema.feature_count();
}

size_t tempora_panel_era_rows(const tempora_panel* panel, size_t era_pos)
{
    if (panel == nullptr || era_pos >= panel->panel.eras.size()) {
        return 0;
    }
    return panel->panel.eras[era_pos].rows();
}

void tempora_panel_free(tempora_panel* panel)
{
    delete panel;
}

tempora_status tempora_booster_train(const tempora_panel* panel, const char* target, const char* mode,
                                     int n_estimators, double learning_rate, int num_leaves, uint64_t seed,
                                     tempora_booster** out)
{
    if (panel == nullptr || target == nullptr || mode == nullptr || out == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] {
        tempora::PanelSet resolved;
        resolved.schema = panel->panel.schema;
        for (const auto& era : panel->panel.eras) {
            if (era.target(target) != nullptr) {
                resolved.eras.push_back(era);
            }
        }
        tempora::BoostConfig cfg;
        cfg.mode = tempora::boost_mode_from_string(mode);
        cfg.n_estimators = n_estimators;
        cfg.learning_rate = learning_rate;
        cfg.num_leaves = num_leaves;
        cfg.seed = seed;
        cfg.validate();
        *out = new tempora_booster{tempora::train(resolved, target, cfg)};
    });
}

tempora_status tempora_booster_load(const char* path, tempora_booster** out)
{
    if (path == nullptr || out == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] { *out = new tempora_booster{tempora::load_booster(path)}; });
}

tempora_status tempora_booster_save(const tempora_booster* booster, const char* path)
{
    if (booster == nullptr || path == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] { tempora::save_booster(path, booster->booster); });
}

size_t tempora_booster_tree_count(const tempora_booster* booster)
{
    return booster == nullptr ? 0 : booster->booster.trees.size();
}

tempora_status tempora_booster_predict_era(const tempora_booster* booster, const tempora_panel* panel,
                                           size_t era_pos, size_t prune_first, double* scores, size_t capacity)
{
    if (booster == nullptr || panel == nullptr || scores == nullptr) {
        return argument_error("null argument");
    }
    if (era_pos >= panel->panel.eras.size()) {
        return argument_error("era position out of range");
    }
    const auto& era = panel->panel.eras[era_pos];
    if (capacity < era.rows()) {
        return argument_error("score buffer too small");
    }
    return guarded([&] {
        const auto pred = booster->booster.predict(era, prune_first);
        std::copy(pred.begin(), pred.end(), scores);
    });
}

void tempora_booster_free(tempora_booster* booster)
{
    delete booster;
}

tempora_status tempora_era_corr(const double* scores, const double* target, size_t n, double* out)
{
    if (scores == nullptr || target == nullptr || out == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] { *out = tempora::era_corr({scores, n}, {target, n}); });
}

tempora_status tempora_summarize(const double* values, size_t n, tempora_summary* out)
{
    if (values == nullptr || out == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] {
        const auto s = tempora::summarize(std::span<const double>(values, n));
        *out = {s.mean, s.volatility, s.max_drawdown, s.sharpe, s.calmar};
    });
}

tempora_status tempora_project_linear(const double* y, const double* x, size_t n, size_t k, double beta, double* out)
{
    if (y == nullptr || x == nullptr || out == nullptr) {
        return argument_error("null argument");
    }
    return guarded([&] {
        const Eigen::Map<const Eigen::MatrixXd> xm(x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
        const auto r = tempora::project_linear({y, n}, xm, beta);
        std::copy(r.begin(), r.end(), out);
    });
}

int tempora_run(const char* subcommand, const char* config_path, const char* out_dir, int has_seed, uint64_t seed)
{
    if (subcommand == nullptr || config_path == nullptr) {
        std::cerr << "tempora: missing subcommand or config\n";
        return TEMPORA_E_CONFIG;
    }
    std::optional<std::filesystem::path> out;
    if (out_dir != nullptr) {
        out = out_dir;
    }
    std::optional<std::uint64_t> s;
    if (has_seed != 0) {
        s = seed;
    }
    return tempora::run_cli(subcommand, config_path, out, s, std::cout, std::cerr);
}

} // extern "C"
