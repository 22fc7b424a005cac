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
#include "tempora/panel.hpp"

#include <doctest.h>

#include <chrono>
#include <functional>

using namespace tempora;
using namespace std::chrono;

TEST_CASE("era dates step by exactly seven days from 2003-01-03")
{
    CHECK(format_date(era_to_date(EraId{1})) == "2003-01-03");
    for (int k = 1; k < 1500; ++k) {
        const auto a = sys_days{era_to_date(EraId{k})};
        const auto b = sys_days{era_to_date(EraId{k + 1})};
        REQUIRE((b - a).count() == 7);
        REQUIRE(era_from_date(era_to_date(EraId{k})).index == k);
    }
}

TEST_CASE("calendar anchors used by the walk-forward presets")
{
    const std::pair<const char*, int> anchors[] = {
        {"2012-07-27", 500}, {"2012-12-21", 521}, {"2014-11-14", 620}, {"2015-05-15", 646},
        {"2014-06-27", 600}, {"2014-11-21", 621}, {"2016-10-14", 720}, {"2017-04-14", 746},
        {"2016-05-27", 700}, {"2016-10-21", 721}, {"2018-09-14", 820}, {"2019-03-15", 846},
    };
    for (const auto& [date, era] : anchors) {
        CAPTURE(date);
        CHECK(era_from_date(parse_date(date)).index == era);
    }
}

TEST_CASE("off-grid and pre-origin dates are rejected")
{
    CHECK_THROWS_AS(era_from_date(parse_date("2003-01-04")), ConfigError);
    CHECK_THROWS_AS(era_from_date(parse_date("2002-12-27")), ConfigError);
    CHECK_THROWS_AS(parse_date("2003-13-01"), ConfigError);
}

TEST_CASE("feature normalization round-trips and rejects out-of-range bins")
{
    FeatureMatrix raw(3, 2);
    std::int8_t v = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t r = 0; r < 3; ++r) {
            raw(r, c) = static_cast<std::int8_t>(v++ % 5);
        }
    }
    const auto norm = normalize_features(raw);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t r = 0; r < 3; ++r) {
            CHECK(norm(r, c) + 2 == raw(r, c));
        }
    }
    raw(1, 1) = 5;
    CHECK_THROWS_AS(normalize_features(raw), DataError);

    const std::vector<double> t{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto nt = normalize_targets(t);
    CHECK(nt == std::vector<double>{-0.5, -0.25, 0.0, 0.25, 0.5});
}

TEST_CASE("missing targets are explicit")
{
    auto p = testing::random_panel(2, 5, 3, 1);
    p.eras[1].targets.clear();
    CHECK(p.eras[1].target("target") == nullptr);
    CHECK_THROWS_AS(target_values(p.eras[1], "target"), DataError);
    CHECK(validate_panel(p).empty());
}

TEST_CASE("validate_panel is empty on a valid panel and each mutation trips one rule")
{
    const auto base = testing::random_panel(4, 6, 3, 9);
    REQUIRE(validate_panel(base).empty());

    const std::vector<std::pair<const char*, std::function<void(PanelSet&)>>> mutations = {
        {"feature outside set", [](PanelSet& p) { p.eras[1].features(2, 1) = 3; }},
        {"target outside set", [](PanelSet& p) { p.eras[2].targets["target"][0] = 0.1; }},
        {"target wrong length", [](PanelSet& p) { p.eras[0].targets["target"].pop_back(); }},
        {"duplicate id", [](PanelSet& p) { p.eras[3].ids[4] = p.eras[3].ids[0]; }},
        {"duplicate era", [](PanelSet& p) { p.eras[2].era = p.eras[1].era; }},
        {"decreasing era", [](PanelSet& p) { std::swap(p.eras[0].era, p.eras[3].era); }},
        {"feature count changes", [](PanelSet& p) {
             p.eras[1].features.append_column(std::vector<std::int8_t>(6, 0));
         }},
        {"unknown target", [](PanelSet& p) { p.eras[0].targets["other"] = p.eras[0].targets["target"]; }},
        {"era index below 1", [](PanelSet& p) { p.eras[0].era = EraId{0}; }},
    };
    for (const auto& [what, mutate] : mutations) {
        CAPTURE(what);
        auto p = base;
        mutate(p);
        const auto v = validate_panel(p);
        CHECK(!v.empty());
    }
}

TEST_CASE("violations carry coordinates")
{
    auto p = testing::random_panel(3, 4, 2, 3);
    p.eras[1].features(3, 1) = -3;
    const auto v = validate_panel(p);
    REQUIRE(v.size() == 1);
    CHECK(v[0].era->index == 2);
    CHECK(*v[0].row == 3);
    CHECK(*v[0].column == 1);
}

TEST_CASE("product features admit the wider value set")
{
    CHECK(is_feature_value(4, FeatureKind::Product));
    CHECK(!is_feature_value(4, FeatureKind::Base));
    CHECK(!is_feature_value(5, FeatureKind::Product));
}

TEST_CASE("up_to returns the era prefix")
{
    const auto p = testing::random_panel(10, 3, 2, 4);
    CHECK(p.up_to(EraId{4}).size() == 4);
    CHECK(p.up_to(EraId{0}).empty());
    CHECK(p.up_to(EraId{99}).size() == 10);
    CHECK(*p.find(EraId{7}) == 6);
    CHECK(!p.find(EraId{11}));
}
