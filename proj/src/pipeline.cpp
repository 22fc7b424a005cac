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

#include "tempora/pipeline.hpp"

#include "tempora/error.hpp"
#include "tempora/parallel.hpp"
#include "tempora/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace tempora {

using nlohmann::json;

namespace {

// Object-notation section that remembers which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw ConfigError("'" + path_ + "' must be an object");
        }
    }

    bool has(const std::string& key)
    {
        if (j_.contains(key)) {
            used_.insert(key);
            return true;
        }
        return false;
    }

    const json& raw(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key, T fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        return convert<T>(j_.at(key), key);
    }

    template <class T>
    T require(const std::string& key)
    {
        if (!has(key)) {
            throw ConfigError("missing key '" + qualified(key) + "'");
        }
        return convert<T>(j_.at(key), key);
    }

    Section child(const std::string& key)
    {
        used_.insert(key);
        return Section(j_.at(key), qualified(key));
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) {
                throw ConfigError("unknown config key '" + qualified(it.key()) + "'");
            }
        }
    }

private:
    template <class T>
    T convert(const json& v, const std::string& key) const
    {
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) {
                    throw ConfigError("'" + qualified(key) + "' must be true or false");
                }
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!v.is_number()) {
                    throw ConfigError("'" + qualified(key) + "' must be a number");
                }
                if constexpr (std::is_integral_v<T>) {
                    const double d = v.get<double>();
                    if (std::floor(d) != d) {
                        throw ConfigError("'" + qualified(key) + "' must be an integer");
                    }
                    if constexpr (std::is_unsigned_v<T>) {
                        if (d < 0) {
                            throw ConfigError("'" + qualified(key) + "' must be non-negative");
                        }
                    }
                }
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("'" + qualified(key) + "': " + e.what());
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

EraRange parse_range(const json& v, const std::string& what)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw ConfigError("'" + what + "' must be [first_era, last_era]");
    }
    return {EraId{v[0].get<std::int32_t>()}, EraId{v[1].get<std::int32_t>()}};
}

SyntheticConfig parse_synthetic(Section s, std::uint64_t master_seed)
{
    SyntheticConfig c;
    c.n_eras = s.get("n_eras", c.n_eras);
    c.stocks_min = s.get("stocks_min", c.stocks_min);
    c.stocks_max = s.get("stocks_max", c.stocks_max);
    c.n_factors = s.get("n_factors", c.n_factors);
    c.n_features = s.get("n_features", c.n_features);
    c.feature_noise = s.get("feature_noise", c.feature_noise);
    const double noise = s.get("noise_scale", 1.0);
    c.seed = s.get<std::uint64_t>("seed", derive_seed(master_seed, "synthetic"));
    if (s.has("targets")) {
        c.target_names = s.raw("targets").get<std::vector<std::string>>();
    }
    if (s.has("proportions")) {
        const auto p = s.raw("proportions").get<std::vector<double>>();
        if (p.size() != 5) {
            throw ConfigError("'data.synthetic.proportions' needs 5 values");
        }
        std::copy(p.begin(), p.end(), c.target_bin_proportions.begin());
    }
    if (s.has("regimes")) {
        const auto& arr = s.raw("regimes");
        if (!arr.is_array()) {
            throw ConfigError("'data.synthetic.regimes' must be a list");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section r(arr[i], "data.synthetic.regimes[" + std::to_string(i) + "]");
            RegimeSegment seg;
            seg.start = EraId{r.require<std::int32_t>("start")};
            seg.factor_weights = r.raw("weights").get<std::vector<double>>();
            seg.noise_scale = r.get("noise_scale", noise);
            r.finish();
            c.regime_schedule.push_back(std::move(seg));
        }
    } else {
        c.regime_schedule = default_regime_schedule(c.n_factors);
        for (auto& seg : c.regime_schedule) {
            seg.noise_scale = noise;
        }
    }
    s.finish();
    c.validate();
    return c;
}

struct HyperBound {
    const char* name;
    double low;
    double high;
    bool integer;
};

// Search-space bounds; count-like lower bounds are relaxed for desk-scale panels.
constexpr HyperBound kSweepBounds[] = {
    {"n_estimators", 1, 1000, true},        {"learning_rate", 0.005, 0.1, false},
    {"num_leaves", 2, 4096, true},          {"max_depth", -1, 64, true},
    {"min_data_in_leaf", 1, 40000, true},   {"lambda_l1", 0.0, 1.0, false},
    {"lambda_l2", 0.0, 1.0, false},         {"feature_fraction", 0.1, 1.0, false},
    {"bagging_fraction", 0.5, 1.0, false},  {"bagging_freq", 0, 50, true},
    {"drop_rate", 0.1, 0.5, false},         {"skip_drop", 0.1, 0.8, false},
    {"top_rate", 0.1, 0.4, false},          {"other_rate", 0.05, 0.2, false},
};

const HyperBound& sweep_bound(const std::string& name)
{
    for (const auto& b : kSweepBounds) {
        if (name == b.name) {
            return b;
        }
    }
    throw ConfigError("'" + name + "' is not a sweepable hyperparameter");
}

void apply_hyperparameter(BoostConfig& c, const std::string& name, double v)
{
    const auto i = static_cast<int>(std::lround(v));
    if (name == "n_estimators") c.n_estimators = i;
    else if (name == "learning_rate") c.learning_rate = v;
    else if (name == "num_leaves") c.num_leaves = i;
    else if (name == "max_depth") c.max_depth = i;
    else if (name == "min_data_in_leaf") c.min_data_in_leaf = i;
    else if (name == "lambda_l1") c.lambda_l1 = v;
    else if (name == "lambda_l2") c.lambda_l2 = v;
    else if (name == "feature_fraction") c.feature_fraction = v;
    else if (name == "bagging_fraction") c.bagging_fraction = v;
    else if (name == "bagging_freq") c.bagging_freq = i;
    else if (name == "drop_rate") c.drop_rate = v;
    else if (name == "skip_drop") c.skip_drop = v;
    else if (name == "top_rate") c.top_rate = v;
    else if (name == "other_rate") c.other_rate = v;
    else throw ConfigError("'" + name + "' is not a sweepable hyperparameter");
}

void parse_boost(Section s, RunConfig& cfg)
{
    auto& b = cfg.boost;
    if (s.has("mode")) {
        b.mode = boost_mode_from_string(s.raw("mode").get<std::string>());
    }
    b.n_estimators = s.get("n_estimators", b.n_estimators);
    b.learning_rate = s.get("learning_rate", b.learning_rate);
    b.num_leaves = s.get("num_leaves", b.num_leaves);
    b.max_depth = s.get("max_depth", b.max_depth);
    if (s.has("min_data_in_leaf")) {
        const auto& v = s.raw("min_data_in_leaf");
        if (v.is_string() && v.get<std::string>() == "auto") {
            cfg.min_data_in_leaf_auto = true;
        } else {
            cfg.min_data_in_leaf_auto = false;
            b.min_data_in_leaf = s.get("min_data_in_leaf", b.min_data_in_leaf);
        }
    }
    b.lambda_l1 = s.get("lambda_l1", b.lambda_l1);
    b.lambda_l2 = s.get("lambda_l2", b.lambda_l2);
    b.feature_fraction = s.get("feature_fraction", b.feature_fraction);
    b.bagging_fraction = s.get("bagging_fraction", b.bagging_fraction);
    b.bagging_freq = s.get("bagging_freq", b.bagging_freq);
    b.bagging_in_all_modes = s.get("bagging_in_all_modes", b.bagging_in_all_modes);
    b.drop_rate = s.get("drop_rate", b.drop_rate);
    b.skip_drop = s.get("skip_drop", b.skip_drop);
    b.top_rate = s.get("top_rate", b.top_rate);
    b.other_rate = s.get("other_rate", b.other_rate);
    b.early_stopping_patience = s.get("early_stopping_patience", b.early_stopping_patience);
    s.finish();
    b.validate();
}

std::vector<std::string> read_name_list(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read feature list '" + path.string() + "'");
    }
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (!line.empty()) {
            names.push_back(line);
        }
    }
    return names;
}

} // namespace

void SweepSpec::validate() const
{
    std::set<std::string> seen;
    for (const auto& axis : grid) {
        const auto& b = sweep_bound(axis.name);
        if (!seen.insert(axis.name).second) {
            throw ConfigError("duplicate sweep axis '" + axis.name + "'");
        }
        if (axis.values.empty()) {
            throw ConfigError("sweep axis '" + axis.name + "' has no values");
        }
        for (double v : axis.values) {
            if (!(v >= b.low && v <= b.high) || (b.integer && std::floor(v) != v)) {
                std::ostringstream msg;
                msg << "sweep value " << v << " for '" << axis.name << "' outside [" << b.low << ", " << b.high << "]"
                    << (b.integer ? " or not an integer" : "");
                throw ConfigError(msg.str());
            }
        }
    }
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Section top(root, "");
    try {
        cfg.seed = top.get<std::uint64_t>("seed", 0);
        cfg.workers = top.get<unsigned>("workers", 1);
        if (cfg.workers == 0) {
            cfg.workers = 1;
        }
        if (top.has("output")) {
            cfg.output_dir = base_dir / top.raw("output").get<std::string>();
        } else {
            cfg.output_dir = base_dir / "out";
        }

        {
            Section data = top.child("data");
            const bool has_path = data.has("path");
            const bool has_synth = data.has("synthetic");
            if (has_path == has_synth) {
                throw ConfigError("'data' needs exactly one of 'path' or 'synthetic'");
            }
            if (has_path) {
                cfg.data_path = base_dir / data.raw("path").get<std::string>();
                if (!std::filesystem::exists(*cfg.data_path)) {
                    throw ConfigError("data file '" + cfg.data_path->string() + "' does not exist");
                }
            } else {
                cfg.synthetic = parse_synthetic(data.child("synthetic"), cfg.seed);
                cfg.synthetic->workers = cfg.workers;
            }
            data.finish();
        }

        if (top.has("split")) {
            Section s = top.child("split");
            if (s.has("preset")) {
                cfg.split = preset_by_name(s.raw("preset").get<std::string>());
            } else {
                GroupedSplitSpec spec;
                spec.name = "custom";
                spec.train = parse_range(s.raw("train"), "split.train");
                spec.gap1 = s.require<int>("gap1");
                spec.validation = parse_range(s.raw("validation"), "split.validation");
                spec.gap2 = s.require<int>("gap2");
                spec.test = parse_range(s.raw("test"), "split.test");
                spec.validate();
                cfg.split = spec;
            }
            s.finish();
        }

        if (top.has("fe")) {
            Section s = top.child("fe");
            cfg.fe.n_products = s.get<std::size_t>("n_products", 0);
            cfg.fe.dropout_pct = s.get("dropout_pct", 0.0);
            cfg.fe.seed = s.get<std::uint64_t>("seed", derive_seed(cfg.seed, "fe"));
            cfg.fe.fixed_mask = s.get("fixed_mask", false);
            s.finish();
            if (!(cfg.fe.dropout_pct >= 0.0 && cfg.fe.dropout_pct <= 1.0)) {
                throw ConfigError("fe.dropout_pct must lie in [0, 1]");
            }
        } else {
            cfg.fe.seed = derive_seed(cfg.seed, "fe");
        }

        if (top.has("model")) {
            Section s = top.child("model");
            const auto kind = s.get<std::string>("kind", "gbdt");
            if (kind == "gbdt") {
                cfg.model = ModelKind::Gbdt;
            } else if (kind == "factor_momentum") {
                cfg.model = ModelKind::FactorMomentum;
            } else {
                throw ConfigError("unknown model kind '" + kind + "'");
            }
            if (s.has("boost")) {
                parse_boost(s.child("boost"), cfg);
            }
            cfg.prune_first = s.get<std::size_t>("prune_first", 0);
            s.finish();
        }

        if (top.has("ensemble")) {
            Section s = top.child("ensemble");
            cfg.ensemble.n_seeds = s.get("n_seeds", cfg.ensemble.n_seeds);
            if (s.has("targets")) {
                cfg.ensemble.targets = s.raw("targets").get<std::vector<std::string>>();
            }
            if (s.has("mode")) {
                cfg.ensemble.mode = ensemble_mode_from_string(s.raw("mode").get<std::string>());
            }
            s.finish();
            if (cfg.ensemble.n_seeds < 1 || cfg.ensemble.targets.empty()) {
                throw ConfigError("ensemble needs n_seeds >= 1 and at least one target");
            }
        } else if (cfg.synthetic) {
            cfg.ensemble.targets = {cfg.synthetic->target_names.front()};
        }

        if (top.has("project")) {
            Section s = top.child("project");
            const auto rule = s.get<std::string>("rule", "low_mean");
            if (rule != "none") {
                ProjectionRule p;
                p.kind = projection_kind_from_string(rule);
                if (s.has("k")) {
                    const auto& v = s.raw("k");
                    if (!(v.is_string() && v.get<std::string>() == "auto")) {
                        p.k = s.get<std::size_t>("k", p.k);
                        cfg.projection_k_auto = false;
                    }
                }
                p.beta = s.get("beta", p.beta);
                p.window = s.get("window", p.window);
                p.lag = s.get("lag", p.lag);
                cfg.projection = p;
            }
            if (s.has("fixed_set_file")) {
                const auto names = read_name_list(base_dir / s.raw("fixed_set_file").get<std::string>());
                if (!cfg.projection) {
                    cfg.projection = ProjectionRule{};
                    cfg.projection->kind = ProjectionKind::Fixed;
                }
                cfg.projection->fixed_set = names;
            }
            if (s.has("fixed_set")) {
                if (!cfg.projection) {
                    throw ConfigError("project.fixed_set given with rule 'none'");
                }
                cfg.projection->fixed_set = s.raw("fixed_set").get<std::vector<std::string>>();
            }
            s.finish();
            if (cfg.projection && cfg.projection->kind == ProjectionKind::Fixed && cfg.projection->fixed_set.empty()) {
                throw ConfigError("project.rule 'fixed' needs project.fixed_set_file");
            }
            if (cfg.projection && !(cfg.projection->beta >= 0.0 && cfg.projection->beta <= 1.0)) {
                throw ConfigError("project.beta must lie in [0, 1]");
            }
        }

        if (top.has("select")) {
            Section s = top.child("select");
            const auto rule = s.get<std::string>("rule", "momentum");
            SelectionConfig sel;
            sel.warm_up = s.get("warm_up", sel.warm_up);
            sel.window = s.get("window", sel.window);
            sel.lag = s.get("lag", sel.lag);
            s.finish();
            if (rule != "none") {
                sel.kind = selection_kind_from_string(rule);
                sel.validate();
                cfg.selection = sel;
            }
        }

        if (top.has("sweep")) {
            Section s = top.child("sweep");
            if (s.has("grid")) {
                const auto& g = s.raw("grid");
                if (!g.is_object()) {
                    throw ConfigError("'sweep.grid' must map hyperparameter names to value lists");
                }
                for (auto it = g.begin(); it != g.end(); ++it) {
                    cfg.sweep.grid.push_back({it.key(), it.value().get<std::vector<double>>()});
                }
            }
            cfg.sweep.random_subsample = s.get<std::size_t>("random_subsample", 0);
            s.finish();
            cfg.sweep.validate();
        }

        if (top.has("regime")) {
            Section s = top.child("regime");
            cfg.regime_window = s.get("window", cfg.regime_window);
            if (s.has("threshold")) {
                const auto& v = s.raw("threshold");
                if (v.is_string() && v.get<std::string>() == "calibrate") {
                    cfg.regime_threshold.reset();
                } else {
                    cfg.regime_threshold = s.get("threshold", kNrvixThreshold);
                }
            }
            cfg.momentum_window = s.get("momentum_window", cfg.momentum_window);
            cfg.momentum_lag = s.get("momentum_lag", cfg.momentum_lag);
            s.finish();
            if (cfg.regime_window < 1 || cfg.momentum_window < 1 || cfg.momentum_lag < 0) {
                throw ConfigError("regime windows must be >= 1 and lag >= 0");
            }
        }
        top.finish();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

GroupedSplitSpec proportional_split(const PanelSet& panel)
{
    if (panel.eras.size() < 10) {
        throw DataError("panel too short for a default split (" + std::to_string(panel.eras.size()) + " eras)");
    }
    const int first = panel.eras.front().era.index;
    const int last = panel.eras.back().era.index;
    const int span = last - first + 1;
    const int gap = std::max(1, span * 3 / 100);
    GroupedSplitSpec s;
    s.name = "proportional";
    s.train = {EraId{first}, EraId{first + span / 2 - 1}};
    s.gap1 = gap;
    s.validation = {EraId{s.train.last.index + gap + 1}, EraId{s.train.last.index + gap + span / 5}};
    s.gap2 = gap;
    s.test = {EraId{s.validation.last.index + gap + 1}, EraId{last}};
    s.validate();
    return s;
}

Subcommand subcommand_from_string(std::string_view text)
{
    if (text == "generate") return Subcommand::Generate;
    if (text == "train") return Subcommand::Train;
    if (text == "backtest") return Subcommand::Backtest;
    if (text == "sweep") return Subcommand::Sweep;
    if (text == "report") return Subcommand::Report;
    throw ConfigError("unknown subcommand '" + std::string(text) + "'");
}

PanelSet load_panel(const RunConfig& cfg)
{
    PanelSet panel = cfg.synthetic ? generate_synthetic(*cfg.synthetic) : read_panel_csv(*cfg.data_path);
    const auto violations = validate_panel(panel);
    if (!violations.empty()) {
        throw DataError("invalid panel: " + violations.front().to_string() + " (" +
                        std::to_string(violations.size()) + " violations)");
    }
    return panel;
}

namespace {

struct Prepared {
    GroupedSplitSpec spec;
    PanelSet full;  // all eras, with product features
    PanelSet train; // with products and dropout
    PanelSet validation;
};

Prepared prepare(const PanelSet& panel, const RunConfig& cfg)
{
    Prepared p;
    p.spec = cfg.split ? *cfg.split : proportional_split(panel);
    p.full = cfg.fe.n_products > 0 ? product_features(panel, cfg.fe) : panel;
    auto parts = make_split(p.full, p.spec);
    p.train = apply_dropout_mask(parts.train, cfg.fe);
    p.validation = std::move(parts.validation);
    for (const auto& t : cfg.ensemble.targets) {
        if (!panel.schema.has_target(t)) {
            throw ConfigError("target '" + t + "' not in the panel");
        }
    }
    return p;
}

BoostConfig resolved_boost(const RunConfig& cfg, const PanelSet& train)
{
    BoostConfig b = cfg.boost;
    if (cfg.min_data_in_leaf_auto) {
        b.min_data_in_leaf = default_min_data_in_leaf(train.total_rows());
    }
    b.workers = cfg.workers;
    return b;
}

struct Member {
    std::string target;
    int seed_index = 0;
    std::unique_ptr<RankingModel> model;
};

std::uint64_t member_seed(std::uint64_t master, std::size_t target_index, int seed_index)
{
    return derive_seed(master, "model", (static_cast<std::uint64_t>(target_index) << 20) |
                                            static_cast<std::uint64_t>(seed_index));
}

std::vector<Member> fit_members(const Prepared& p, const RunConfig& cfg, std::function<void(EraId)> on_read)
{
    std::vector<Member> members;
    const auto& targets = cfg.ensemble.targets;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const int seeds = cfg.model == ModelKind::FactorMomentum ? 1 : cfg.ensemble.n_seeds;
        for (int s = 0; s < seeds; ++s) {
            Member m;
            m.target = targets[t];
            m.seed_index = s;
            if (cfg.model == ModelKind::Gbdt) {
                m.model = std::make_unique<GbdtModel>(resolved_boost(cfg, p.train), cfg.prune_first,
                                                      p.validation.empty() ? nullptr : &p.validation);
            } else {
                m.model = std::make_unique<FactorMomentumModel>(cfg.momentum_window, cfg.momentum_lag,
                                                                targets[t] == cfg.main_target() ? on_read
                                                                                                : std::function<void(EraId)>{});
            }
            m.model->fit(p.train, targets[t], member_seed(cfg.seed, t, s));
            members.push_back(std::move(m));
        }
    }
    return members;
}

ProjectionRule base_projection_rule(const RunConfig& cfg, std::size_t n_features)
{
    ProjectionRule r = cfg.projection.value_or(ProjectionRule{});
    if (!cfg.projection || cfg.projection_k_auto) {
        r.k = default_projection_size(n_features);
    }
    return r;
}

} // namespace

BacktestResult run_backtest(const PanelSet& panel, const RunConfig& cfg, AuditLog* audit)
{
    const auto prep = prepare(panel, cfg);
    const auto& full = prep.full;
    const auto& main = cfg.main_target();
    auto log = [audit](AuditEvent::Kind kind, EraId era) {
        if (audit != nullptr) {
            audit->events.push_back({kind, era});
        }
    };
    auto on_read = [log](EraId era) { log(AuditEvent::Kind::TargetRead, era); };

    auto members = fit_members(prep, cfg, on_read);

    // Eras resolved before the test window are handed to online models up front.
    const EraId test_first = prep.spec.test.first;
    for (const auto& era : full.eras) {
        if (era.era < test_first && prep.spec.train.last < era.era) {
            for (auto& m : members) {
                m.model->observe(era);
            }
        }
    }

    const std::size_t m_features = full.schema.feature_count();
    const ProjectionRule base_rule = base_projection_rule(cfg, m_features);
    if (cfg.projection) {
        base_rule.validate(m_features);
    }
    std::vector<ProjectionRule> method_rules;
    std::vector<std::string> method_names;
    if (cfg.selection) {
        for (auto kind : kAllProjectionKinds) {
            if (kind == ProjectionKind::Fixed && base_rule.fixed_set.empty()) {
                continue;
            }
            ProjectionRule r = base_rule;
            r.kind = kind;
            method_rules.push_back(r);
            method_names.emplace_back(to_string(kind));
        }
    }
    const bool need_stats = !method_rules.empty() || (cfg.projection && cfg.projection->kind != ProjectionKind::Fixed);
    std::optional<MethodHistory> history;
    if (!method_names.empty()) {
        history.emplace(method_names);
    }
    FeatureCorrCache stats_cache(main, on_read);

    BacktestResult result;
    result.method_names = method_names;
    result.member_scores.resize(members.size());
    const auto& test_range = prep.spec.test;

    for (const auto& era : full.eras) {
        if (!test_range.contains(era.era)) {
            continue;
        }
        std::vector<std::vector<double>> member_preds;
        member_preds.reserve(members.size());
        for (const auto& m : members) {
            member_preds.push_back(m.model->predict(era));
        }
        // Seeds average within a target, then targets average with equal weight.
        std::vector<std::vector<double>> per_target;
        for (const auto& t : cfg.ensemble.targets) {
            std::vector<std::vector<double>> same;
            for (std::size_t i = 0; i < members.size(); ++i) {
                if (members[i].target == t) {
                    same.push_back(member_preds[i]);
                }
            }
            per_target.push_back(average_predictions(same));
        }
        const auto raw = average_predictions(per_target);

        std::optional<FeatureCorrStats> stats;
        if (need_stats) {
            try {
                stats = feature_corr_stats(full.up_to(EraId{era.era.index - base_rule.lag}), full.schema, main, era.era,
                                           base_rule.window, base_rule.lag, &stats_cache);
            } catch (const NotReadyError&) {
                stats.reset();
            }
        }

        std::vector<double> final_scores;
        std::vector<std::vector<double>> method_preds;
        if (history) {
            for (const auto& r : method_rules) {
                method_preds.push_back(dynamic_project(raw, era, full.schema, r, stats).scores);
            }
            const auto w = select_method(*history, era.era, *cfg.selection);
            final_scores = combine_predictions(method_preds, w);
            result.weights.push_back(w);
        } else if (cfg.projection) {
            final_scores = dynamic_project(raw, era, full.schema, base_rule, stats).scores;
        } else {
            final_scores = raw;
        }

        log(AuditEvent::Kind::Emit, era.era);
        result.predictions[era.era] = EraPredictions{era.ids, final_scores};

        const auto* y = era.target(main);
        if (y != nullptr) {
            log(AuditEvent::Kind::TargetRead, era.era);
            result.scores.push_back({era.era, era_corr(final_scores, *y)});
            if (history) {
                std::vector<double> realized;
                for (const auto& mp : method_preds) {
                    realized.push_back(era_corr(mp, *y));
                }
                history->append(era.era, realized);
            }
            for (std::size_t i = 0; i < members.size(); ++i) {
                result.member_scores[i].push_back({era.era, era_corr(member_preds[i], *y)});
            }
        }
        for (auto& m : members) {
            m.model->observe(era);
        }
    }
    if (result.scores.size() < 2) {
        throw DataError("test window has fewer than 2 scored eras");
    }

    // Regime labels use the baseline on base features only; all test eras are scored by now.
    const auto nmi = nmi_series(panel, main, cfg.momentum_window, cfg.momentum_lag);
    const auto vix = nrvix(nmi, cfg.regime_window);
    if (cfg.regime_threshold) {
        result.regime_threshold = *cfg.regime_threshold;
    } else {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& p : vix) {
            if (p.value && p.era < test_first) {
                sum += *p.value;
                ++n;
            }
        }
        result.regime_threshold = n > 0 ? sum / static_cast<double>(n) : kNrvixThreshold;
    }
    std::map<EraId, Regime> label_of;
    for (const auto& l : classify_regimes(vix, result.regime_threshold)) {
        label_of[l.era] = l.label;
    }
    for (const auto& p : result.scores) {
        const auto it = label_of.find(p.era);
        result.labels.push_back({p.era, it == label_of.end() ? Regime::Undefined : it->second});
    }
    result.report = regime_report(result.scores, result.labels);
    if (cfg.ensemble.mode == EnsembleMode::OverModels) {
        try {
            result.over_models = average_metrics(result.member_scores);
        } catch (const UndefinedMetricError&) {
            result.over_models.reset();
        }
    }
    return result;
}

double SweepRow::sharpe() const
{
    return validation ? validation->sharpe : std::numeric_limits<double>::quiet_NaN();
}

std::vector<SweepRow> run_sweep(const PanelSet& panel, const RunConfig& cfg)
{
    if (cfg.model != ModelKind::Gbdt) {
        throw ConfigError("sweep requires model.kind 'gbdt'");
    }
    cfg.sweep.validate();
    const auto prep = prepare(panel, cfg);
    if (prep.validation.empty()) {
        throw DataError("sweep needs validation eras");
    }
    const auto& main = cfg.main_target();

    std::vector<std::vector<double>> cells{{}};
    for (const auto& axis : cfg.sweep.grid) {
        std::vector<std::vector<double>> next;
        for (const auto& c : cells) {
            for (double v : axis.values) {
                auto e = c;
                e.push_back(v);
                next.push_back(std::move(e));
            }
        }
        cells = std::move(next);
    }
    std::vector<std::size_t> chosen(cells.size());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    if (cfg.sweep.random_subsample > 0 && cfg.sweep.random_subsample < cells.size()) {
        auto rng = make_stream(cfg.seed, "sweep.subsample");
        for (std::size_t k = 0; k < cfg.sweep.random_subsample; ++k) {
            std::swap(chosen[k], chosen[k + uniform_below(rng, chosen.size() - k)]);
        }
        chosen.resize(cfg.sweep.random_subsample);
        std::sort(chosen.begin(), chosen.end());
    }

    const BoostConfig base = resolved_boost(cfg, prep.train);
    const auto train_data = TrainingData::from_panel(prep.train, main);
    const auto valid_data = TrainingData::from_panel(prep.validation, main);
    std::vector<SweepRow> rows(chosen.size());
    // cells run in parallel; each cell's training is single-threaded
    parallel_for(chosen.size(), cfg.workers, [&](std::size_t k) {
        BoostConfig b = base;
        b.workers = 1;
        b.seed = member_seed(cfg.seed, 0, 0);
        for (std::size_t a = 0; a < cfg.sweep.grid.size(); ++a) {
            apply_hyperparameter(b, cfg.sweep.grid[a].name, cells[chosen[k]][a]);
        }
        const auto booster = train(train_data, b, &valid_data);
        CorrSeries series;
        for (const auto& era : prep.validation.eras) {
            series.push_back({era.era, era_corr(booster.predict(era), target_values(era, main))});
        }
        SweepRow row;
        row.cell = chosen[k];
        row.values = cells[chosen[k]];
        try {
            row.validation = summarize(series);
        } catch (const UndefinedMetricError&) {
            row.validation.reset();
        }
        rows[k] = std::move(row);
    });
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        const double sa = a.sharpe();
        const double sb = b.sharpe();
        if (std::isnan(sa) || std::isnan(sb)) {
            return !std::isnan(sa) && std::isnan(sb);
        }
        return sa > sb;
    });
    return rows;
}

namespace {

std::string metric_field(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return format_real(v);
}

void write_metrics_fields(std::ostream& out, const std::optional<SummaryMetrics>& s)
{
    if (!s) {
        out << ",nan,nan,nan,nan,nan";
        return;
    }
    out << ',' << metric_field(s->mean) << ',' << metric_field(s->volatility) << ','
        << metric_field(s->max_drawdown) << ',' << metric_field(s->sharpe) << ',' << metric_field(s->calmar);
}

std::ofstream create(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::Runtime, "cannot write '" + path.string() + "'");
    }
    return out;
}

RegimeReport read_era_scores(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read '" + path.string() + "'; run backtest first");
    }
    std::string line;
    if (!std::getline(in, line) || line != "era,corr,regime") {
        throw ParseError(1, "expected header 'era,corr,regime'");
    }
    CorrSeries series;
    std::vector<RegimeLabel> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string era_text;
        std::string corr_text;
        std::string regime_text;
        if (!std::getline(row, era_text, ',') || !std::getline(row, corr_text, ',') || !std::getline(row, regime_text)) {
            throw ParseError(lineno, "malformed era score row");
        }
        try {
            const EraId era{std::stoi(era_text)};
            series.push_back({era, std::stod(corr_text)});
            labels.push_back({era, regime_text == "high" ? Regime::High
                                   : regime_text == "low" ? Regime::Low
                                                          : Regime::Undefined});
        } catch (const std::logic_error&) {
            throw ParseError(lineno, "malformed era score row");
        }
    }
    return regime_report(series, labels);
}

} // namespace

void write_summary_csv(std::ostream& out, const RegimeReport& report)
{
    out << "scope,mean,volatility,max_drawdown,sharpe,calmar\n";
    out << "all";
    write_metrics_fields(out, report.all);
    out << "\nhigh";
    write_metrics_fields(out, report.high);
    out << "\nlow";
    write_metrics_fields(out, report.low);
    out << '\n';
}

void write_summary_block(std::ostream& out, const RegimeReport& report)
{
    auto row = [&](const char* scope, const std::optional<SummaryMetrics>& s) {
        out << std::left << std::setw(6) << scope << std::right;
        if (!s) {
            out << "  (no eras)\n";
            return;
        }
        out << std::fixed << std::setprecision(4) << std::setw(10) << s->mean << std::setw(12) << s->volatility
            << std::setw(14) << s->max_drawdown << std::setw(10) << s->sharpe << std::setw(10) << s->calmar << '\n';
        out.unsetf(std::ios::floatfield);
    };
    out << "scope       mean  volatility  max_drawdown    sharpe    calmar\n";
    row("all", report.all);
    row("high", report.high);
    row("low", report.low);
}

int run(Subcommand cmd, const RunConfig& cfg, std::ostream& out)
{
    std::filesystem::create_directories(cfg.output_dir);
    const auto& dir = cfg.output_dir;
    switch (cmd) {
    case Subcommand::Generate: {
        if (!cfg.synthetic) {
            throw ConfigError("generate needs data.synthetic");
        }
        const auto panel = generate_synthetic(*cfg.synthetic);
        write_panel_csv(dir / "panel.csv", panel);
        out << "wrote " << panel.eras.size() << " eras, " << panel.total_rows() << " rows to "
            << (dir / "panel.csv").string() << '\n';
        return 0;
    }
    case Subcommand::Train: {
        if (cfg.model != ModelKind::Gbdt) {
            throw ConfigError("train produces boosters and needs model.kind 'gbdt'");
        }
        const auto prep = prepare(load_panel(cfg), cfg);
        const auto models = dir / "models";
        std::filesystem::create_directories(models);
        const auto members = fit_members(prep, cfg, {});
        for (const auto& m : members) {
            const auto& booster = static_cast<const GbdtModel&>(*m.model).booster();
            const auto path = models / (m.target + "_seed" + std::to_string(m.seed_index) + ".txt");
            save_booster(path.string(), booster);
            out << "wrote " << path.string() << " (" << booster.trees.size() << " trees)\n";
        }
        return 0;
    }
    case Subcommand::Backtest: {
        const auto result = run_backtest(load_panel(cfg), cfg);
        write_predictions_csv(dir / "predictions.csv", result.predictions);
        {
            auto f = create(dir / "era_scores.csv");
            f << "era,corr,regime\n";
            for (std::size_t i = 0; i < result.scores.size(); ++i) {
                f << result.scores[i].era.index << ',' << format_real(result.scores[i].value) << ','
                  << to_string(result.labels[i].label) << '\n';
            }
        }
        {
            auto f = create(dir / "summary.csv");
            write_summary_csv(f, result.report);
        }
        if (!result.method_names.empty()) {
            auto f = create(dir / "selection.csv");
            f << "era,chosen_method";
            for (const auto& n : result.method_names) {
                f << ",weight_" << n;
            }
            f << ",combined_corr\n";
            std::map<EraId, double> corr_of;
            for (const auto& p : result.scores) {
                corr_of[p.era] = p.value;
            }
            std::size_t i = 0;
            for (const auto& [era, pred] : result.predictions) {
                const auto& w = result.weights[i++];
                const auto chosen = chosen_method(w);
                f << era.index << ',' << (chosen ? result.method_names[*chosen] : std::string("equal"));
                for (double x : w) {
                    f << ',' << format_real(x);
                }
                const auto it = corr_of.find(era);
                f << ',' << (it == corr_of.end() ? std::string() : format_real(it->second)) << '\n';
            }
        }
        {
            auto f = create(dir / "members.csv");
            f << "member,mean,volatility,max_drawdown,sharpe,calmar\n";
            for (std::size_t i = 0; i < result.member_scores.size(); ++i) {
                std::optional<SummaryMetrics> s;
                try {
                    s = summarize(result.member_scores[i]);
                } catch (const UndefinedMetricError&) {
                }
                f << "member" << i;
                write_metrics_fields(f, s);
                f << '\n';
            }
            if (result.over_models) {
                f << "over_models";
                write_metrics_fields(f, result.over_models);
                f << '\n';
            }
        }
        out << "regime threshold " << format_real(result.regime_threshold) << '\n';
        write_summary_block(out, result.report);
        return 0;
    }
    case Subcommand::Sweep: {
        const auto rows = run_sweep(load_panel(cfg), cfg);
        auto f = create(dir / "sweep.csv");
        f << "cell";
        for (const auto& axis : cfg.sweep.grid) {
            f << ',' << axis.name;
        }
        f << ",validation_mean,validation_volatility,validation_sharpe\n";
        for (const auto& r : rows) {
            f << r.cell;
            for (double v : r.values) {
                f << ',' << format_real(v);
            }
            if (r.validation) {
                f << ',' << metric_field(r.validation->mean) << ',' << metric_field(r.validation->volatility) << ','
                  << metric_field(r.validation->sharpe) << '\n';
            } else {
                f << ",nan,nan,nan\n";
            }
        }
        out << "wrote " << rows.size() << " sweep rows to " << (dir / "sweep.csv").string() << '\n';
        return 0;
    }
    case Subcommand::Report: {
        const auto report = read_era_scores(dir / "era_scores.csv");
        {
            auto f = create(dir / "summary.csv");
            write_summary_csv(f, report);
        }
        write_summary_block(out, report);
        return 0;
    }
    }
    return 0;
}

int run_cli(std::string_view subcommand, const std::filesystem::path& config_path,
            const std::optional<std::filesystem::path>& out_dir, const std::optional<std::uint64_t>& seed,
            std::ostream& out, std::ostream& err)
{
    try {
        const auto cmd = subcommand_from_string(subcommand);
        RunConfig cfg = load_run_config(config_path);
        if (seed) {
            // re-derive seeded sub-streams from the overriding master seed
            std::ifstream in(config_path, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            auto j = json::parse(ss.str());
            j["seed"] = *seed;
            cfg = parse_run_config(j.dump(), config_path.parent_path());
        }
        if (out_dir) {
            cfg.output_dir = *out_dir;
        }
        return run(cmd, cfg, out);
    } catch (const Error& e) {
        err << "tempora: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const json::exception& e) {
        err << "tempora: config: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Config);
    } catch (const std::exception& e) {
        err << "tempora: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Runtime);
    }
}

} // namespace tempora
