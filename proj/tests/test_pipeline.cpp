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

#include "support.hpp"

#include "tempora/error.hpp"
#include "tempora/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace tempora;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("tempora_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallConfig = R"({
  "seed": 3,
  "data": {"synthetic": {"n_eras": 70, "stocks_min": 80, "stocks_max": 100, "n_features": 8}},
  "split": {"train": [1, 30], "gap1": 2, "validation": [33, 40], "gap2": 2, "test": [43, 70]},
  "model": {"boost": {"n_estimators": 10, "num_leaves": 4}},
  "ensemble": {"n_seeds": 2},
  "project": {"rule": "low_mean", "k": 3, "window": 8, "lag": 2},
  "select": {"rule": "momentum", "warm_up": 4, "window": 4, "lag": 2},
  "regime": {"window": 8, "momentum_window": 8, "momentum_lag": 2}
})";

} // namespace

TEST_CASE("config parsing rejects unknown keys and bad data sources")
{
    CHECK_NOTHROW(parse_run_config(kSmallConfig));
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"synthetic": {}}, "modle": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"synthetic": {"n_era": 5}}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"path": "/nonexistent.csv"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"synthetic": {}}, "seed": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"synthetic": {}}, "project": {"rule": "fixed"}})"), ConfigError);
}

TEST_CASE("config values land in the run config")
{
    const auto cfg = parse_run_config(kSmallConfig);
    CHECK(cfg.seed == 3);
    CHECK(cfg.synthetic->n_eras == 70);
    CHECK(cfg.split->gap1 == 2);
    CHECK(cfg.boost.n_estimators == 10);
    CHECK(cfg.ensemble.n_seeds == 2);
    CHECK(cfg.projection->k == 3);
    CHECK(!cfg.projection_k_auto);
    CHECK(cfg.selection->warm_up == 4);
    CHECK(cfg.regime_threshold == kNrvixThreshold);
    const auto preset = parse_run_config(R"({"data": {"synthetic": {}}, "split": {"preset": "cv1"},
                                             "regime": {"threshold": "calibrate"}})");
    CHECK(preset.split->test.first.index == 646);
    CHECK(!preset.regime_threshold);
}

TEST_CASE("sweep grids are checked against the hyperparameter bounds")
{
    CHECK_NOTHROW(parse_run_config(R"({"data": {"synthetic": {}},
        "sweep": {"grid": {"learning_rate": [0.01, 0.1], "num_leaves": [4, 8]}}})"));
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"synthetic": {}}, "sweep": {"grid": {"learning_rate": [0.5]}}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"synthetic": {}}, "sweep": {"grid": {"num_leaves": [4.5]}}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"data": {"synthetic": {}}, "sweep": {"grid": {"colour": [1]}}})"),
                    ConfigError);
}

TEST_CASE("backtest emits each era before reading its target")
{
    const auto cfg = parse_run_config(kSmallConfig);
    const auto panel = load_panel(cfg);
    AuditLog log;
    const auto result = run_backtest(panel, cfg, &log);
    CHECK(result.scores.size() == 28);
    CHECK(result.method_names.size() == 4);
    std::set<int> emitted;
    for (const auto& ev : log.events) {
        if (ev.kind == AuditEvent::Kind::Emit) {
            emitted.insert(ev.era.index);
        } else if (ev.era.index >= 43) {
            CHECK(emitted.count(ev.era.index) == 1);
        }
    }
    CHECK(emitted.size() == 28);
}

TEST_CASE("backtest on a default 120-era panel writes the summary schema")
{
    const auto dir = scratch("defaults");
    const auto cfg_path = dir / "run.json";
    std::ofstream(cfg_path) << R"({"data": {"synthetic": {"n_eras": 120, "stocks_min": 60, "stocks_max": 80}},
                                   "model": {"boost": {"n_estimators": 10}}, "ensemble": {"n_seeds": 1}})";
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(run_cli("backtest", cfg_path, std::nullopt, std::nullopt, out, err) == 0);
    const auto summary = slurp(dir / "out" / "summary.csv");
    CHECK(summary.rfind("scope,mean,volatility,max_drawdown,sharpe,calmar\nall,", 0) == 0);
    CHECK(summary.find("\nhigh,") != std::string::npos);
    CHECK(summary.find("\nlow,") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "predictions.csv"));
    CHECK(slurp(dir / "out" / "era_scores.csv").rfind("era,corr,regime\n", 0) == 0);

    std::ostringstream report;
    REQUIRE(run_cli("report", cfg_path, std::nullopt, std::nullopt, report, err) == 0);
    CHECK(slurp(dir / "out" / "summary.csv") == summary);
    CHECK(report.str().find("all") != std::string::npos);
}

TEST_CASE("generate, train and sweep subcommands")
{
    const auto dir = scratch("subcommands");
    const auto cfg_path = dir / "run.json";
    std::ofstream(cfg_path) << R"({"seed": 1,
        "data": {"synthetic": {"n_eras": 40, "stocks_min": 50, "stocks_max": 60, "n_features": 6,
                               "targets": ["target", "alt"]}},
        "model": {"boost": {"n_estimators": 5}},
        "ensemble": {"n_seeds": 2, "targets": ["target", "alt"]},
        "sweep": {"grid": {"learning_rate": [0.01, 0.1], "num_leaves": [2, 4]}, "random_subsample": 3}})";
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(run_cli("generate", cfg_path, std::nullopt, std::nullopt, out, err) == 0);
    std::ifstream panel_in(dir / "out" / "panel.csv");
    CHECK(validate_panel(parse_panel_csv(panel_in)).empty());

    REQUIRE(run_cli("train", cfg_path, std::nullopt, std::nullopt, out, err) == 0);
    for (const char* name : {"target_seed0.txt", "target_seed1.txt", "alt_seed0.txt", "alt_seed1.txt"}) {
        CHECK(load_booster((dir / "out" / "models" / name).string()).trees.size() == 5);
    }

    REQUIRE(run_cli("sweep", cfg_path, std::nullopt, std::nullopt, out, err) == 0);
    std::istringstream sweep(slurp(dir / "out" / "sweep.csv"));
    std::string line;
    std::getline(sweep, line);
    CHECK(line == "cell,learning_rate,num_leaves,validation_mean,validation_volatility,validation_sharpe");
    std::vector<double> sharpes;
    while (std::getline(sweep, line)) {
        sharpes.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    }
    CHECK(sharpes.size() == 3);
    CHECK(std::is_sorted(sharpes.rbegin(), sharpes.rend()));
}

TEST_CASE("CLI exit codes by error kind")
{
    const auto dir = scratch("exitcodes");
    std::ostringstream out;
    std::ostringstream err;
    std::ofstream(dir / "bad.json") << R"({"data": {"synthetic": {}}, "unknown": 1})";
    CHECK(run_cli("backtest", dir / "bad.json", std::nullopt, std::nullopt, out, err) == 2);
    CHECK(run_cli("launch", dir / "bad.json", std::nullopt, std::nullopt, out, err) == 2);

    std::ofstream(dir / "panel.csv") << "era,id,f_a,t_target\n1,x,7,0.5\n";
    std::ofstream(dir / "data.json") << R"({"data": {"path": "panel.csv"}})";
    CHECK(run_cli("backtest", dir / "data.json", std::nullopt, std::nullopt, out, err) == 3);
    CHECK(err.str().find("line 2") != std::string::npos);

    std::ofstream(dir / "report.json") << R"({"data": {"synthetic": {}}, "output": "empty"})";
    CHECK(run_cli("report", dir / "report.json", std::nullopt, std::nullopt, out, err) == 3);
}
