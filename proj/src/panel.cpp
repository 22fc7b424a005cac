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

#include "tempora/panel.hpp"

#include "tempora/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace tempora {

namespace chr = std::chrono;

chr::year_month_day era_to_date(EraId era)
{
    return chr::year_month_day{kEraOrigin + chr::days{7 * (static_cast<std::int64_t>(era.index) - 1)}};
}

EraId era_from_date(chr::year_month_day date)
{
    if (!date.ok()) {
        throw ConfigError("invalid calendar date");
    }
    const auto offset = (chr::sys_days{date} - kEraOrigin).count();
    if (offset < 0 || offset % 7 != 0) {
        throw ConfigError("date " + format_date(date) + " is not an era date");
    }
    return EraId{static_cast<std::int32_t>(offset / 7 + 1)};
}

chr::year_month_day parse_date(std::string_view text)
{
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    auto r = std::from_chars(p, end, y);
    bool ok = r.ec == std::errc{} && r.ptr != end && *r.ptr == '-';
    if (ok) {
        r = std::from_chars(r.ptr + 1, end, m);
        ok = r.ec == std::errc{} && r.ptr != end && *r.ptr == '-';
    }
    if (ok) {
        r = std::from_chars(r.ptr + 1, end, d);
        ok = r.ec == std::errc{} && r.ptr == end;
    }
    const chr::year_month_day date{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ok || !date.ok()) {
        throw ConfigError("bad date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    return date;
}

std::string format_date(chr::year_month_day date)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

void FeatureMatrix::append_column(std::span<const std::int8_t> values)
{
    if (cols_ > 0 && values.size() != rows_) {
        throw ShapeError("column length " + std::to_string(values.size()) + " != rows " + std::to_string(rows_));
    }
    rows_ = values.size();
    data_.insert(data_.end(), values.begin(), values.end());
    ++cols_;
}

std::optional<std::size_t> PanelSchema::feature_index(std::string_view name) const
{
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - feature_names.begin());
}

bool PanelSchema::has_target(std::string_view name) const
{
    return std::find(target_names.begin(), target_names.end(), name) != target_names.end();
}

PanelSchema PanelSchema::make(std::vector<std::string> features, std::vector<std::string> targets)
{
    PanelSchema s;
    s.feature_kinds.assign(features.size(), FeatureKind::Base);
    s.feature_names = std::move(features);
    s.target_names = std::move(targets);
    return s;
}

const std::vector<double>* PanelEra::target(std::string_view name) const
{
    const auto it = targets.find(name);
    return it == targets.end() ? nullptr : &it->second;
}

std::size_t PanelSet::total_rows() const noexcept
{
    std::size_t n = 0;
    for (const auto& e : eras) {
        n += e.rows();
    }
    return n;
}

std::optional<std::size_t> PanelSet::find(EraId era) const
{
    const auto it = std::lower_bound(eras.begin(), eras.end(), era,
                                     [](const PanelEra& e, EraId id) { return e.era < id; });
    if (it == eras.end() || it->era != era) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - eras.begin());
}

std::span<const PanelEra> PanelSet::up_to(EraId last) const
{
    const auto it = std::upper_bound(eras.begin(), eras.end(), last,
                                     [](EraId id, const PanelEra& e) { return id < e.era; });
    return {eras.data(), static_cast<std::size_t>(it - eras.begin())};
}

std::span<const double> target_values(const PanelEra& era, std::string_view target)
{
    const auto* t = era.target(target);
    if (t == nullptr) {
        throw DataError("era " + std::to_string(era.era.index) + " has no values for target '" +
                        std::string(target) + "'");
    }
    return *t;
}

FeatureMatrix normalize_features(const FeatureMatrix& raw)
{
    FeatureMatrix out(raw.rows(), raw.cols());
    for (std::size_t c = 0; c < raw.cols(); ++c) {
        for (std::size_t r = 0; r < raw.rows(); ++r) {
            const auto v = raw(r, c);
            if (v < 0 || v > 4) {
                throw DataError("raw feature value " + std::to_string(v) + " at row " + std::to_string(r) +
                                ", column " + std::to_string(c) + " outside 0..4");
            }
            out(r, c) = static_cast<std::int8_t>(v - 2);
        }
    }
    return out;
}

std::vector<double> normalize_targets(std::span<const double> raw)
{
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = raw[i];
        if (v != 0.0 && v != 0.25 && v != 0.5 && v != 0.75 && v != 1.0) {
            throw DataError("raw target value " + std::to_string(v) + " at row " + std::to_string(i) +
                            " is not one of 0, 0.25, 0.5, 0.75, 1");
        }
        out[i] = v - 0.5;
    }
    return out;
}

bool is_target_value(double v) noexcept
{
    return v == -0.5 || v == -0.25 || v == 0.0 || v == 0.25 || v == 0.5;
}

bool is_feature_value(std::int8_t v, FeatureKind kind) noexcept
{
    const int bound = kind == FeatureKind::Base ? 2 : 4;
    return v >= -bound && v <= bound;
}

std::string Violation::to_string() const
{
    std::string s;
    if (era) {
        s += "era " + std::to_string(era->index) + ": ";
    }
    if (row) {
        s += "row " + std::to_string(*row) + ": ";
    }
    if (column) {
        s += "column " + std::to_string(*column) + ": ";
    }
    return s + message;
}

std::vector<Violation> validate_panel(const PanelSet& panel)
{
    std::vector<Violation> out;
    const auto& schema = panel.schema;
    const std::size_t m = schema.feature_count();
    if (schema.feature_kinds.size() != m) {
        out.push_back({{}, {}, {}, "schema has " + std::to_string(schema.feature_kinds.size()) +
                                       " feature kinds for " + std::to_string(m) + " features"});
    }
    {
        std::unordered_set<std::string> seen;
        for (const auto& name : schema.feature_names) {
            if (!seen.insert(name).second) {
                out.push_back({{}, {}, {}, "duplicate feature name '" + name + "'"});
            }
        }
    }

    std::optional<EraId> prev;
    for (const auto& era : panel.eras) {
        if (era.era.index < 1) {
            out.push_back({era.era, {}, {}, "era index must be >= 1"});
        }
        if (prev && !(*prev < era.era)) {
            out.push_back({era.era, {}, {},
                           era.era == *prev ? "duplicate era" : "era ids not strictly increasing"});
        }
        prev = era.era;

        const std::size_t n = era.ids.size();
        if (era.features.cols() != m) {
            out.push_back({era.era, {}, {}, "feature count " + std::to_string(era.features.cols()) +
                                                " differs from schema " + std::to_string(m)});
        }
        if (era.features.rows() != n && era.features.cols() > 0) {
            out.push_back({era.era, {}, {}, "feature rows " + std::to_string(era.features.rows()) +
                                                " differ from id count " + std::to_string(n)});
        }
        std::unordered_set<std::string_view> ids;
        for (std::size_t r = 0; r < n; ++r) {
            if (!ids.insert(era.ids[r]).second) {
                out.push_back({era.era, r, {}, "duplicate id '" + era.ids[r] + "'"});
            }
        }
        const std::size_t cols = std::min(era.features.cols(), schema.feature_kinds.size());
        for (std::size_t c = 0; c < cols; ++c) {
            const auto column = era.features.column(c);
            for (std::size_t r = 0; r < column.size(); ++r) {
                if (!is_feature_value(column[r], schema.feature_kinds[c])) {
                    out.push_back({era.era, r, c, "feature value " + std::to_string(column[r]) +
                                                      " outside the allowed set"});
                }
            }
        }
        for (const auto& [name, values] : era.targets) {
            if (!schema.has_target(name)) {
                out.push_back({era.era, {}, {}, "target '" + name + "' not in schema"});
            }
            if (values.size() != n) {
                out.push_back({era.era, {}, {}, "target '" + name + "' has " + std::to_string(values.size()) +
                                                    " values for " + std::to_string(n) + " rows"});
            }
            for (std::size_t r = 0; r < values.size(); ++r) {
                if (!is_target_value(values[r])) {
                    out.push_back({era.era, r, {}, "target '" + name + "' value " + std::to_string(values[r]) +
                                                       " outside the allowed set"});
                }
            }
        }
    }
    return out;
}

} // namespace tempora
