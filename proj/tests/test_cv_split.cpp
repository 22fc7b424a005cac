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

#include "tempora/cv_split.hpp"
#include "tempora/error.hpp"

#include <doctest.h>

using namespace tempora;

namespace {

int last_index(const PanelSet& p)
{
    return p.eras.back().era.index;
}

int first_index(const PanelSet& p)
{
    return p.eras.front().era.index;
}

} // namespace

TEST_CASE("walk-forward presets match the published calendar")
{
    const auto presets = walk_forward_presets();
    REQUIRE(presets.size() == 3);
    const int expect[3][6] = {
        {1, 500, 521, 620, 646, 1030},
        {1, 600, 621, 720, 746, 1030},
        {1, 700, 721, 820, 846, 1030},
    };
    for (int i = 0; i < 3; ++i) {
        const auto& s = presets[i];
        CAPTURE(s.name);
        CHECK(s.train.first.index == expect[i][0]);
        CHECK(s.train.last.index == expect[i][1]);
        CHECK(s.validation.first.index == expect[i][2]);
        CHECK(s.validation.last.index == expect[i][3]);
        CHECK(s.test.first.index == expect[i][4]);
        CHECK(s.test.last.index == expect[i][5]);
        CHECK(s.gap1 == 20);
        CHECK(s.gap2 == 25);
        CHECK_NOTHROW(s.validate());
        CHECK(s.train.last.index + s.gap1 < s.validation.first.index);
        CHECK(s.validation.last.index + s.gap2 < s.test.first.index);
    }
    CHECK(preset_by_name("CV-2") == presets[1]);
    CHECK_THROWS_AS(preset_by_name("cv4"), ConfigError);
}

TEST_CASE("invalid specs are rejected")
{
    GroupedSplitSpec s{"x", {EraId{1}, EraId{10}}, 3, {EraId{14}, EraId{20}}, 2, {EraId{23}, EraId{30}}};
    CHECK_NOTHROW(s.validate());
    auto bad = s;
    bad.gap1 = 4; // 10 + 4 < 14 fails
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.validation = {EraId{20}, EraId{14}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.gap2 = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.test = {EraId{15}, EraId{30}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("split property: gaps hold on the produced panels for random valid specs")
{
    const auto panel = testing::random_panel(120, 3, 2, 1);
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int t_end = 5 + static_cast<int>(uniform_below(rng, 40));
        const int g1 = static_cast<int>(uniform_below(rng, 6));
        const int v_start = t_end + g1 + 1 + static_cast<int>(uniform_below(rng, 3));
        const int v_end = v_start + static_cast<int>(uniform_below(rng, 20));
        const int g2 = static_cast<int>(uniform_below(rng, 6));
        const int s_start = v_end + g2 + 1 + static_cast<int>(uniform_below(rng, 3));
        const int s_end = s_start + static_cast<int>(uniform_below(rng, 60));
        GroupedSplitSpec spec{"r", {EraId{1}, EraId{t_end}}, g1, {EraId{v_start}, EraId{v_end}}, g2,
                              {EraId{s_start}, EraId{s_end}}};
        const auto parts = make_split(panel, spec);
        REQUIRE(!parts.train.empty());
        REQUIRE(!parts.validation.empty());
        REQUIRE(!parts.test.empty());
        CHECK(last_index(parts.train) + g1 < first_index(parts.validation));
        CHECK(last_index(parts.validation) + g2 < first_index(parts.test));
        CHECK(last_index(parts.test) == std::min(s_end, 120));
    }
}

TEST_CASE("ranges outside the panel are rejected except the test tail")
{
    const auto panel = testing::random_panel(50, 3, 2, 1);
    GroupedSplitSpec s{"x", {EraId{1}, EraId{10}}, 3, {EraId{14}, EraId{20}}, 2, {EraId{23}, EraId{1030}}};
    CHECK(last_index(make_split(panel, s).test) == 50);
    s.validation.last = EraId{60};
    s.test = {EraId{63}, EraId{70}};
    CHECK_THROWS_AS(make_split(panel, s), ConfigError);
}
