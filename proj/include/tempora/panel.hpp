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

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tempora {

// 1-based weekly era index.
struct EraId {
    std::int32_t index = 1;

    friend constexpr auto operator<=>(EraId, EraId) = default;
};

// Era 1 is 2003-01-03; eras are spaced exactly 7 days apart.
inline constexpr std::chrono::sys_days kEraOrigin = std::chrono::sys_days{
    std::chrono::year{2003} / std::chrono::January / 3};

std::chrono::year_month_day era_to_date(EraId era);

// Inverse of era_to_date. Throws ConfigError for dates before era 1 or off the weekly grid.
EraId era_from_date(std::chrono::year_month_day date);

// Parses "YYYY-MM-DD".
std::chrono::year_month_day parse_date(std::string_view text);
std::string format_date(std::chrono::year_month_day date);

// Column-major matrix of small integers. Split finding scans one feature at a time.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols, std::int8_t fill = 0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::int8_t operator()(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
    std::int8_t& operator()(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }

    std::span<const std::int8_t> column(std::size_t col) const { return {data_.data() + col * rows_, rows_}; }
    std::span<std::int8_t> column(std::size_t col) { return {data_.data() + col * rows_, rows_}; }

    // Appends a column of length rows().
    void append_column(std::span<const std::int8_t> values);

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::int8_t> data_;
};

// Base features take values in {-2..2}; pairwise products take values in {-4..4}.
enum class FeatureKind : std::uint8_t { Base, Product };

struct PanelSchema {
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;
    std::vector<std::string> target_names;

    std::size_t feature_count() const noexcept { return feature_names.size(); }
    std::optional<std::size_t> feature_index(std::string_view name) const;
    bool has_target(std::string_view name) const;

    // Schema with all-base features.
    static PanelSchema make(std::vector<std::string> features, std::vector<std::string> targets);

    friend bool operator==(const PanelSchema&, const PanelSchema&) = default;
};

// One week's cross-section. A target missing from `targets` is unresolved for this era.
struct PanelEra {
    EraId era;
    std::vector<std::string> ids;
    FeatureMatrix features;
    std::map<std::string, std::vector<double>, std::less<>> targets;

    std::size_t rows() const noexcept { return ids.size(); }
    const std::vector<double>* target(std::string_view name) const;

    friend bool operator==(const PanelEra&, const PanelEra&) = default;
};

// Ordered eras sharing one schema. Treated as immutable once built.
struct PanelSet {
    PanelSchema schema;
    std::vector<PanelEra> eras;

    bool empty() const noexcept { return eras.empty(); }
    std::size_t total_rows() const noexcept;

    // Index of the era with this id, if present.
    std::optional<std::size_t> find(EraId era) const;

    // Eras with id <= last, as a contiguous prefix.
    std::span<const PanelEra> up_to(EraId last) const;

    friend bool operator==(const PanelSet&, const PanelSet&) = default;
};

std::span<const double> target_values(const PanelEra& era, std::string_view target);

// Subtracts 2 from raw bins {0..4}. Throws DataError naming row and column.
FeatureMatrix normalize_features(const FeatureMatrix& raw);

// Subtracts 0.5 from raw target bins {0, 0.25, 0.5, 0.75, 1}.
std::vector<double> normalize_targets(std::span<const double> raw);

bool is_target_value(double v) noexcept;
bool is_feature_value(std::int8_t v, FeatureKind kind) noexcept;

struct Violation {
    std::optional<EraId> era;
    std::optional<std::size_t> row;
    std::optional<std::size_t> column;
    std::string message;

    std::string to_string() const;
};

// Every invariant violation in the panel; empty iff valid.
std::vector<Violation> validate_panel(const PanelSet& panel);

} // namespace tempora
