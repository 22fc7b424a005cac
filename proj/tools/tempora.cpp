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

#include <CLI11.hpp>

#include <cstdint>
#include <string>

int main(int argc, char** argv)
{
    CLI::App app{"tempora: era-wise panel modelling and backtests"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;

    for (const char* name : {"generate", "train", "backtest", "sweep", "report"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "master seed (overrides the config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const auto* sub = app.get_subcommands().front();
    const bool has_seed = sub->count("--seed") > 0;
    return tempora_run(sub->get_name().c_str(), config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                       has_seed ? 1 : 0, seed);
}
