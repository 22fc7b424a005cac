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

#include "tempora/data_io.hpp"

#include "tempora/error.hpp"
#include "tempora/parallel.hpp"
#include "tempora/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tempora {

std::string format_real(double v)
{
    if (v == 0.0) {
        return "0";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

template <class T>
bool parse_number(std::string_view text, T& out)
{
    if (text.empty()) {
        return false;
    }
    const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
    return r.ec == std::errc{} && r.ptr == text.data() + text.size();
}

struct EraBuilder {
    std::vector<std::string> ids;
    std::vector<std::vector<std::int8_t>> columns;
    std::vector<std::vector<double>> targets;
    std::vector<std::size_t> missing; // per target, count of empty fields
    std::vector<std::size_t> first_line;
    std::unordered_set<std::string> seen;
};

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::Runtime, "cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::ifstream open_for_read(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    return in;
}

} // namespace

PanelSet parse_panel_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(1, "empty file, expected header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_fields(line);
    if (header.size() < 2 || header[0] != "era" || header[1] != "id") {
        throw ParseError(1, "header must start with 'era,id'");
    }
    PanelSet panel;
    std::vector<std::size_t> feature_cols;
    std::vector<std::size_t> target_cols;
    for (std::size_t c = 2; c < header.size(); ++c) {
        const auto name = header[c];
        if (name.starts_with("f_") && name.size() > 2) {
            panel.schema.feature_names.emplace_back(name.substr(2));
            panel.schema.feature_kinds.push_back(FeatureKind::Base);
            feature_cols.push_back(c);
        } else if (name.starts_with("t_") && name.size() > 2) {
            panel.schema.target_names.emplace_back(name.substr(2));
            target_cols.push_back(c);
        } else {
            throw ParseError(1, "unrecognized column '" + std::string(name) + "'");
        }
    }
    if (feature_cols.empty()) {
        throw ParseError(1, "missing feature columns (f_<name>)");
    }
    {
        std::set<std::string> names(panel.schema.feature_names.begin(), panel.schema.feature_names.end());
        if (names.size() != panel.schema.feature_names.size()) {
            throw ParseError(1, "duplicate feature column");
        }
        std::set<std::string> tnames(panel.schema.target_names.begin(), panel.schema.target_names.end());
        if (tnames.size() != panel.schema.target_names.size()) {
            throw ParseError(1, "duplicate target column");
        }
    }

    const std::size_t m = feature_cols.size();
    const std::size_t nt = target_cols.size();
    std::map<int, EraBuilder> builders;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                         std::to_string(fields.size()));
        }
        int era = 0;
        if (!parse_number(fields[0], era) || era < 1) {
            throw ParseError(lineno, "era must be a positive integer, got '" + std::string(fields[0]) + "'");
        }
        if (fields[1].empty()) {
            throw ParseError(lineno, "empty id");
        }
        auto& b = builders[era];
        if (b.columns.empty()) {
            b.columns.resize(m);
            b.targets.resize(nt);
            b.missing.assign(nt, 0);
        }
        std::string id(fields[1]);
        if (!b.seen.insert(id).second) {
            throw ParseError(lineno, "duplicate id '" + id + "' in era " + std::to_string(era));
        }
        b.first_line.push_back(lineno);
        b.ids.push_back(std::move(id));
        for (std::size_t j = 0; j < m; ++j) {
            int v = 0;
            const auto text = fields[feature_cols[j]];
            if (!parse_number(text, v)) {
                throw ParseError(lineno, "feature '" + panel.schema.feature_names[j] + "' is not an integer: '" +
                                             std::string(text) + "'");
            }
            if (v < -2 || v > 2) {
                throw ParseError(lineno, "feature '" + panel.schema.feature_names[j] + "' value " +
                                             std::to_string(v) + " outside -2..2");
            }
            b.columns[j].push_back(static_cast<std::int8_t>(v));
        }
        for (std::size_t k = 0; k < nt; ++k) {
            const auto text = fields[target_cols[k]];
            if (text.empty()) {
                ++b.missing[k];
                b.targets[k].push_back(0.0);
                continue;
            }
            double v = 0.0;
            if (!parse_number(text, v) || !is_target_value(v)) {
                throw ParseError(lineno, "target '" + panel.schema.target_names[k] + "' value '" +
                                             std::string(text) + "' not in {-0.5,-0.25,0,0.25,0.5}");
            }
            b.targets[k].push_back(v);
        }
    }

    for (auto& [era, b] : builders) {
        PanelEra pe;
        pe.era = EraId{era};
        for (const auto& col : b.columns) {
            pe.features.append_column(col);
        }
        for (std::size_t k = 0; k < nt; ++k) {
            if (b.missing[k] == 0) {
                pe.targets.emplace(panel.schema.target_names[k], std::move(b.targets[k]));
            } else if (b.missing[k] != b.ids.size()) {
                throw ParseError(b.first_line.front(), "target '" + panel.schema.target_names[k] +
                                                           "' partially missing in era " + std::to_string(era));
            }
        }
        pe.ids = std::move(b.ids);
        panel.eras.push_back(std::move(pe));
    }
    return panel;
}

PanelSet read_panel_csv(const std::filesystem::path& path)
{
    auto in = open_for_read(path);
    return parse_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const PanelSet& panel)
{
    out << "era,id";
    for (const auto& f : panel.schema.feature_names) {
        out << ",f_" << f;
    }
    for (const auto& t : panel.schema.target_names) {
        out << ",t_" << t;
    }
    out << '\n';
    for (const auto& era : panel.eras) {
        std::vector<const std::vector<double>*> targets;
        for (const auto& t : panel.schema.target_names) {
            targets.push_back(era.target(t));
        }
        for (std::size_t r = 0; r < era.rows(); ++r) {
            if (era.ids[r].find_first_of(",\n\r") != std::string::npos) {
                throw DataError("id '" + era.ids[r] + "' contains a separator character");
            }
            out << era.era.index << ',' << era.ids[r];
            for (std::size_t c = 0; c < era.features.cols(); ++c) {
                out << ',' << static_cast<int>(era.features(r, c));
            }
            for (const auto* t : targets) {
                out << ',';
                if (t != nullptr) {
                    out << format_real((*t)[r]);
                }
            }
            out << '\n';
        }
    }
}

void write_panel_csv(const std::filesystem::path& path, const PanelSet& panel)
{
    auto out = open_for_write(path);
    write_panel_csv(out, panel);
    if (!out) {
        throw Error(ErrorKind::Runtime, "write failed for '" + path.string() + "'");
    }
}

void write_predictions_csv(std::ostream& out, const PredictionSet& predictions)
{
    out << "era,id,score\n";
    for (const auto& [era, p] : predictions) {
        if (p.ids.size() != p.scores.size()) {
            throw ShapeError("era " + std::to_string(era.index) + ": ids and scores differ in length");
        }
        std::vector<std::size_t> order(p.ids.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p.ids[a] < p.ids[b]; });
        for (auto i : order) {
            if (!std::isfinite(p.scores[i])) {
                throw DataError("non-finite score for id '" + p.ids[i] + "' in era " + std::to_string(era.index));
            }
            out << era.index << ',' << p.ids[i] << ',' << format_real(p.scores[i]) << '\n';
        }
    }
}

void write_predictions_csv(const std::filesystem::path& path, const PredictionSet& predictions)
{
    auto out = open_for_write(path);
    write_predictions_csv(out, predictions);
    if (!out) {
        throw Error(ErrorKind::Runtime, "write failed for '" + path.string() + "'");
    }
}

PredictionSet read_predictions_csv(const std::filesystem::path& path)
{
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line) || line != "era,id,score") {
        throw ParseError(1, "expected header 'era,id,score'");
    }
    PredictionSet out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        int era = 0;
        double score = 0.0;
        if (fields.size() != 3 || !parse_number(fields[0], era) || !parse_number(fields[2], score)) {
            throw ParseError(lineno, "malformed prediction row");
        }
        auto& p = out[EraId{era}];
        p.ids.emplace_back(fields[1]);
        p.scores.push_back(score);
    }
    return out;
}

void SyntheticConfig::validate() const
{
    if (n_eras < 1) {
        throw ConfigError("synthetic: n_eras must be >= 1");
    }
    if (stocks_min < 5 || stocks_max < stocks_min) {
        throw ConfigError("synthetic: need 5 <= stocks_min <= stocks_max");
    }
    if (n_factors < 1) {
        throw ConfigError("synthetic: n_factors must be >= 1");
    }
    if (n_features < n_factors) {
        throw ConfigError("synthetic: n_features (" + std::to_string(n_features) + ") < n_factors (" +
                          std::to_string(n_factors) + ")");
    }
    if (feature_noise < 0.0) {
        throw ConfigError("synthetic: feature_noise must be >= 0");
    }
    if (regime_schedule.empty() || regime_schedule.front().start.index != 1) {
        throw ConfigError("synthetic: regime schedule must start at era 1");
    }
    for (std::size_t i = 0; i < regime_schedule.size(); ++i) {
        const auto& seg = regime_schedule[i];
        if (i > 0 && !(regime_schedule[i - 1].start < seg.start)) {
            throw ConfigError("synthetic: regime start eras must be strictly increasing");
        }
        if (seg.factor_weights.size() != static_cast<std::size_t>(n_factors)) {
            throw ConfigError("synthetic: regime at era " + std::to_string(seg.start.index) + " has " +
                              std::to_string(seg.factor_weights.size()) + " weights for " +
                              std::to_string(n_factors) + " factors");
        }
        if (seg.noise_scale < 0.0) {
            throw ConfigError("synthetic: noise_scale must be >= 0");
        }
    }
    double sum = 0.0;
    for (double p : target_bin_proportions) {
        if (p < 0.0) {
            throw ConfigError("synthetic: negative bin proportion");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError("synthetic: bin proportions must sum to 1");
    }
    if (target_names.empty()) {
        throw ConfigError("synthetic: at least one target name required");
    }
}

std::vector<RegimeSegment> default_regime_schedule(int n_factors)
{
    RegimeSegment seg;
    seg.start = EraId{1};
    seg.noise_scale = 1.0;
    for (int f = 0; f < n_factors; ++f) {
        seg.factor_weights.push_back(1.0 / static_cast<double>(f + 1));
    }
    return {seg};
}

std::vector<std::size_t> bin_counts(std::size_t n, std::span<const double> proportions)
{
    std::vector<std::size_t> counts(proportions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t b = 0; b < proportions.size(); ++b) {
        const double exact = proportions[b] * static_cast<double>(n);
        counts[b] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[b];
        remainders.emplace_back(exact - std::floor(exact), b);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
        ++counts[remainders[i % remainders.size()].second];
    }
    return counts;
}

std::vector<int> bin_by_rank(std::span<const double> values, std::span<const std::size_t> tiebreak,
                             std::span<const std::size_t> counts)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> pos_in_tiebreak(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos_in_tiebreak[tiebreak[i]] = i;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) {
            return values[a] < values[b];
        }
        return pos_in_tiebreak[a] < pos_in_tiebreak[b];
    });
    std::vector<int> bins(n);
    std::size_t k = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        for (std::size_t c = 0; c < counts[b] && k < n; ++c, ++k) {
            bins[order[k]] = static_cast<int>(b);
        }
    }
    return bins;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
    }
    return idx;
}

const RegimeSegment& active_regime(const std::vector<RegimeSegment>& schedule, EraId era)
{
    const RegimeSegment* active = &schedule.front();
    for (const auto& seg : schedule) {
        if (!(era < seg.start)) {
            active = &seg;
        }
    }
    return *active;
}

PanelEra generate_era(const SyntheticConfig& cfg, EraId era)
{
    const auto e = static_cast<std::uint64_t>(era.index);
    const auto nf = static_cast<std::size_t>(cfg.n_factors);
    const auto m = static_cast<std::size_t>(cfg.n_features);

    auto count_rng = make_stream(cfg.seed, "synthetic.stocks", e);
    const auto span = static_cast<std::uint64_t>(cfg.stocks_max - cfg.stocks_min + 1);
    const std::size_t n = static_cast<std::size_t>(cfg.stocks_min) + uniform_below(count_rng, span);

    std::vector<std::vector<double>> exposure(nf, std::vector<double>(n));
    auto exposure_rng = make_stream(cfg.seed, "synthetic.exposure", e);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < nf; ++f) {
            exposure[f][i] = standard_normal(exposure_rng);
        }
    }

    auto tiebreak_rng = make_stream(cfg.seed, "synthetic.tiebreak", e);
    const auto tiebreak = shuffled_indices(n, tiebreak_rng);

    PanelEra out;
    out.era = era;
    out.features = FeatureMatrix(n, m);
    const std::array<double, 5> equal{0.2, 0.2, 0.2, 0.2, 0.2};
    const auto feature_counts = bin_counts(n, equal);
    auto feature_rng = make_stream(cfg.seed, "synthetic.feature", e);
    std::vector<double> view(n);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t f = j % nf;
        for (std::size_t i = 0; i < n; ++i) {
            view[i] = exposure[f][i] + cfg.feature_noise * standard_normal(feature_rng);
        }
        const auto bins = bin_by_rank(view, tiebreak, feature_counts);
        auto col = out.features.column(j);
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = static_cast<std::int8_t>(bins[i] - 2);
        }
    }

    const auto& regime = active_regime(cfg.regime_schedule, era);
    const auto target_counts = bin_counts(n, cfg.target_bin_proportions);
    static constexpr std::array<double, 5> kTargetValues{-0.5, -0.25, 0.0, 0.25, 0.5};
    std::vector<double> ret(n);
    for (std::size_t k = 0; k < cfg.target_names.size(); ++k) {
        auto noise_rng = make_stream(cfg.seed, "synthetic.return", (e << 16) | k);
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            for (std::size_t f = 0; f < nf; ++f) {
                r += regime.factor_weights[f] * exposure[f][i];
            }
            ret[i] = r + regime.noise_scale * standard_normal(noise_rng);
        }
        const auto bins = bin_by_rank(ret, tiebreak, target_counts);
        std::vector<double> target(n);
        for (std::size_t i = 0; i < n; ++i) {
            target[i] = kTargetValues[static_cast<std::size_t>(bins[i])];
        }
        out.targets.emplace(cfg.target_names[k], std::move(target));
    }

    out.ids.reserve(n);
    std::unordered_set<std::string> used;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t h = derive_seed(cfg.seed, "synthetic.id", (e << 32) | i);
        char buf[24];
        std::snprintf(buf, sizeof buf, "n%016llx", static_cast<unsigned long long>(h));
        std::string id = buf;
        while (!used.insert(id).second) {
            h = splitmix64(h);
            std::snprintf(buf, sizeof buf, "n%016llx", static_cast<unsigned long long>(h));
            id = buf;
        }
        out.ids.push_back(std::move(id));
    }
    return out;
}

} // namespace

PanelSet generate_synthetic(const SyntheticConfig& cfg)
{
    cfg.validate();
    PanelSet panel;
    std::vector<std::string> names;
    const int width = cfg.n_features >= 100 ? 3 : 2;
    for (int j = 0; j < cfg.n_features; ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%0*d", width, j);
        names.emplace_back(buf);
    }
    panel.schema = PanelSchema::make(std::move(names), cfg.target_names);
    panel.eras.resize(static_cast<std::size_t>(cfg.n_eras));
    parallel_for(panel.eras.size(), cfg.workers, [&](std::size_t i) {
        panel.eras[i] = generate_era(cfg, EraId{static_cast<std::int32_t>(i + 1)});
    });
    return panel;
}

} // namespace tempora
