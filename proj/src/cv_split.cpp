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

#include "tempora/cv_split.hpp"

#include "tempora/error.hpp"

#include <algorithm>
#include <cctype>

namespace tempora {

namespace {

std::string describe(const EraRange& r)
{
    return std::to_string(r.first.index) + ".." + std::to_string(r.last.index);
}

void check_range(const EraRange& r, const char* what)
{
    if (r.first.index < 1 || r.last < r.first) {
        throw ConfigError(std::string(what) + " range " + describe(r) + " is empty or reversed");
    }
}

PanelSet select(const PanelSet& panel, const EraRange& range)
{
    PanelSet out;
    out.schema = panel.schema;
    for (const auto& era : panel.eras) {
        if (range.contains(era.era)) {
            out.eras.push_back(era);
        }
    }
    return out;
}

} // namespace

void GroupedSplitSpec::validate() const
{
    check_range(train, "train");
    check_range(validation, "validation");
    check_range(test, "test");
    if (gap1 < 0 || gap2 < 0) {
        throw ConfigError("gaps must be non-negative");
    }
    if (validation.first.index - train.last.index <= gap1) {
        throw ConfigError("validation " + describe(validation) + " starts within " + std::to_string(gap1) +
                          " eras of train " + describe(train));
    }
    if (test.first.index - validation.last.index <= gap2) {
        throw ConfigError("test " + describe(test) + " starts within " + std::to_string(gap2) +
                          " eras of validation " + describe(validation));
    }
}

SplitPanels make_split(const PanelSet& panel, const GroupedSplitSpec& spec)
{
    spec.validate();
    if (panel.empty()) {
        throw DataError("cannot split an empty panel");
    }
    const EraId first = panel.eras.front().era;
    const EraId last = panel.eras.back().era;
    EraRange test = spec.test;
    if (last < test.last) {
        test.last = last;
    }
    for (const auto* r : {&spec.train, &spec.validation}) {
        if (r->first < first || last < r->last) {
            throw ConfigError("range " + describe(*r) + " outside panel eras " + std::to_string(first.index) + ".." +
                              std::to_string(last.index));
        }
    }
    if (test.last < test.first) {
        throw ConfigError("test range " + describe(spec.test) + " starts after the panel's last era " +
                          std::to_string(last.index));
    }
    return {select(panel, spec.train), select(panel, spec.validation), select(panel, test)};
}

std::vector<GroupedSplitSpec> walk_forward_presets()
{
    struct Row {
        const char* name;
        const char* train_end;
        const char* valid_start;
        const char* valid_end;
        const char* test_start;
    };
    static constexpr Row kRows[] = {
        {"cv1", "2012-07-27", "2012-12-21", "2014-11-14", "2015-05-15"},
        {"cv2", "2014-06-27", "2014-11-21", "2016-10-14", "2017-04-14"},
        {"cv3", "2016-05-27", "2016-10-21", "2018-09-14", "2019-03-15"},
    };
    const EraId train_start = era_from_date(parse_date("2003-01-03"));
    const EraId test_end = era_from_date(parse_date("2022-09-23"));
    std::vector<GroupedSplitSpec> out;
    for (const auto& row : kRows) {
        GroupedSplitSpec s;
        s.name = row.name;
        s.train = {train_start, era_from_date(parse_date(row.train_end))};
        s.validation = {era_from_date(parse_date(row.valid_start)), era_from_date(parse_date(row.valid_end))};
        s.test = {era_from_date(parse_date(row.test_start)), test_end};
        s.gap1 = s.validation.first.index - s.train.last.index - 1;
        s.gap2 = s.test.first.index - s.validation.last.index - 1;
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

GroupedSplitSpec preset_by_name(const std::string& name)
{
    std::string key;
    for (char c : name) {
        if (c != '-' && c != '_') {
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    for (auto& s : walk_forward_presets()) {
        if (s.name == key) {
            return s;
        }
    }
    throw ConfigError("unknown split preset '" + name + "'");
}

} // namespace tempora
