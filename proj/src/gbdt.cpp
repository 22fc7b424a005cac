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

#include "tempora/gbdt.hpp"

#include "tempora/data_io.hpp"
#include "tempora/error.hpp"
#include "tempora/parallel.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tempora {

std::string_view to_string(BoostMode mode)
{
    switch (mode) {
    case BoostMode::Gbdt:
        return "gbdt";
    case BoostMode::Dart:
        return "dart";
    case BoostMode::Goss:
        return "goss";
    }
    return "gbdt";
}

BoostMode boost_mode_from_string(std::string_view text)
{
    if (text == "gbdt") {
        return BoostMode::Gbdt;
    }
    if (text == "dart") {
        return BoostMode::Dart;
    }
    if (text == "goss") {
        return BoostMode::Goss;
    }
    throw ConfigError("unknown boosting mode '" + std::string(text) + "'");
}

void BoostConfig::validate() const
{
    if (n_estimators < 0) {
        throw ConfigError("n_estimators must be >= 0");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("learning_rate must be > 0");
    }
    if (num_leaves < 2) {
        throw ConfigError("num_leaves must be >= 2");
    }
    if (min_data_in_leaf < 1) {
        throw ConfigError("min_data_in_leaf must be >= 1");
    }
    if (lambda_l1 < 0.0 || lambda_l2 < 0.0) {
        throw ConfigError("lambda_l1 and lambda_l2 must be >= 0");
    }
    if (!(feature_fraction > 0.0 && feature_fraction <= 1.0)) {
        throw ConfigError("feature_fraction must lie in (0, 1]");
    }
    if (!(bagging_fraction > 0.0 && bagging_fraction <= 1.0)) {
        throw ConfigError("bagging_fraction must lie in (0, 1]");
    }
    if (bagging_freq < 0) {
        throw ConfigError("bagging_freq must be >= 0");
    }
    if (!(drop_rate >= 0.0 && drop_rate <= 1.0) || !(skip_drop >= 0.0 && skip_drop <= 1.0)) {
        throw ConfigError("drop_rate and skip_drop must lie in [0, 1]");
    }
    if (mode == BoostMode::Goss && !(top_rate > 0.0 && other_rate > 0.0 && top_rate + other_rate <= 1.0)) {
        throw ConfigError("goss needs top_rate > 0, other_rate > 0 and top_rate + other_rate <= 1");
    }
    if (early_stopping_patience < 0) {
        throw ConfigError("early_stopping_patience must be >= 0");
    }
}

int default_min_data_in_leaf(std::size_t rows)
{
    return std::max(20, static_cast<int>(rows / 1000));
}

double Tree::evaluate(const FeatureMatrix& x, std::size_t row) const
{
    std::size_t k = 0;
    while (!nodes[k].is_leaf()) {
        const auto& n = nodes[k];
        k = static_cast<std::size_t>(x(row, static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right);
    }
    return nodes[k].value;
}

std::size_t Tree::leaf_count() const
{
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int Tree::depth() const
{
    if (nodes.empty()) {
        return 0;
    }
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (!nodes[k].is_leaf()) {
            d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
            d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
        }
        deepest = std::max(deepest, d[k]);
    }
    return deepest;
}

std::vector<double> Booster::predict(const FeatureMatrix& x, std::size_t prune_first) const
{
    if (prune_first > trees.size() / 2) {
        throw ConfigError("cannot prune " + std::to_string(prune_first) + " of " + std::to_string(trees.size()) +
                          " trees: at most half may be pruned");
    }
    for (std::size_t k = prune_first; k < trees.size(); ++k) {
        for (const auto& n : trees[k].nodes) {
            if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= x.cols()) {
                throw ShapeError("booster uses feature " + std::to_string(n.feature) + " but data has " +
                                 std::to_string(x.cols()) + " features");
            }
        }
    }
    std::vector<double> out(x.rows(), f0);
    for (std::size_t k = prune_first; k < trees.size(); ++k) {
        const double scale = learning_rate * trees[k].weight;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            out[i] += scale * trees[k].evaluate(x, i);
        }
    }
    return out;
}

std::vector<double> Booster::predict(const PanelEra& era, std::size_t prune_first) const
{
    return predict(era.features, prune_first);
}

namespace {

void write_tree(std::ostream& out, const Tree& tree, std::size_t k)
{
    const auto& n = tree.nodes[k];
    if (n.is_leaf()) {
        out << " leaf(" << format_real(n.value) << ')';
        return;
    }
    out << " node(" << n.feature << ',' << format_real(n.threshold) << ')';
    write_tree(out, tree, static_cast<std::size_t>(n.left));
    write_tree(out, tree, static_cast<std::size_t>(n.right));
}

double parse_real(std::string_view text, std::size_t line)
{
    double v = 0.0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ParseError(line, "bad number '" + std::string(text) + "'");
    }
    return v;
}

std::string_view field_value(std::string_view token, std::string_view key, std::size_t line)
{
    if (!token.starts_with(key) || token.size() <= key.size() || token[key.size()] != '=') {
        throw ParseError(line, "expected '" + std::string(key) + "=', got '" + std::string(token) + "'");
    }
    return token.substr(key.size() + 1);
}

std::vector<std::string_view> tokens_of(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') {
            ++i;
        }
        const std::size_t j = std::min(line.find(' ', i), line.size());
        if (j > i) {
            out.push_back(line.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

int read_node(Tree& tree, std::span<const std::string_view> tokens, std::size_t& pos, std::size_t line)
{
    if (pos >= tokens.size()) {
        throw ParseError(line, "truncated tree");
    }
    const auto tok = tokens[pos++];
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (tok.starts_with("leaf(") && tok.ends_with(")")) {
        tree.nodes[static_cast<std::size_t>(index)].value = parse_real(tok.substr(5, tok.size() - 6), line);
        return index;
    }
    if (!tok.starts_with("node(") || !tok.ends_with(")")) {
        throw ParseError(line, "unexpected token '" + std::string(tok) + "'");
    }
    const auto body = tok.substr(5, tok.size() - 6);
    const auto comma = body.find(',');
    int feature = -1;
    if (comma == std::string_view::npos) {
        throw ParseError(line, "malformed node '" + std::string(tok) + "'");
    }
    const auto r = std::from_chars(body.data(), body.data() + comma, feature);
    if (r.ec != std::errc{} || r.ptr != body.data() + comma || feature < 0) {
        throw ParseError(line, "bad feature index in '" + std::string(tok) + "'");
    }
    const double threshold = parse_real(body.substr(comma + 1), line);
    const int left = read_node(tree, tokens, pos, line);
    const int right = read_node(tree, tokens, pos, line);
    auto& n = tree.nodes[static_cast<std::size_t>(index)];
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return index;
}

} // namespace

std::string Booster::serialize() const
{
    std::ostringstream out;
    out << "tempora-booster v1 mode=" << to_string(mode) << " f0=" << format_real(f0)
        << " lr=" << format_real(learning_rate) << '\n';
    for (const auto& tree : trees) {
        out << "weight=" << format_real(tree.weight);
        write_tree(out, tree, 0);
        out << '\n';
    }
    return out.str();
}

Booster Booster::deserialize(std::string_view text)
{
    Booster b;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool header = true;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto tokens = tokens_of(line);
        if (header) {
            if (tokens.size() != 5 || tokens[0] != "tempora-booster" || tokens[1] != "v1") {
                throw ParseError(line_no, "expected 'tempora-booster v1 mode=<m> f0=<v> lr=<v>'");
            }
            b.mode = boost_mode_from_string(field_value(tokens[2], "mode", line_no));
            b.f0 = parse_real(field_value(tokens[3], "f0", line_no), line_no);
            b.learning_rate = parse_real(field_value(tokens[4], "lr", line_no), line_no);
            header = false;
            continue;
        }
        Tree tree;
        tree.weight = parse_real(field_value(tokens.at(0), "weight", line_no), line_no);
        std::size_t pos = 1;
        read_node(tree, tokens, pos, line_no);
        if (pos != tokens.size()) {
            throw ParseError(line_no, "trailing tokens after tree");
        }
        b.trees.push_back(std::move(tree));
    }
    if (header) {
        throw ParseError(1, "empty booster file");
    }
    return b;
}

void save_booster(const std::string& path, const Booster& booster)
{
    std::ofstream out(path, std::ios::binary);
    out << booster.serialize();
    if (!out) {
        throw Error(ErrorKind::Runtime, "cannot write booster to '" + path + "'");
    }
}

Booster load_booster(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open booster '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return Booster::deserialize(ss.str());
}

TrainingData TrainingData::from_panel(const PanelSet& panel, std::string_view target)
{
    TrainingData d;
    const std::size_t m = panel.schema.feature_count();
    const std::size_t n = panel.total_rows();
    if (n == 0) {
        throw DataError("empty training data");
    }
    d.features = FeatureMatrix(n, m);
    d.target.reserve(n);
    std::size_t offset = 0;
    for (const auto& era : panel.eras) {
        const auto t = target_values(era, target);
        d.target.insert(d.target.end(), t.begin(), t.end());
        for (std::size_t c = 0; c < m; ++c) {
            const auto src = era.features.column(c);
            std::copy(src.begin(), src.end(), d.features.column(c).begin() + static_cast<std::ptrdiff_t>(offset));
        }
        offset += era.rows();
    }
    return d;
}

RowSample RowSample::all(std::size_t n)
{
    RowSample s;
    s.rows.resize(n);
    std::iota(s.rows.begin(), s.rows.end(), std::uint32_t{0});
    return s;
}

double soft_threshold(double sum, double l1) noexcept
{
    const double mag = std::max(std::abs(sum) - l1, 0.0);
    return sum < 0.0 ? -mag : mag;
}

double leaf_value(double sum, double count, const BoostConfig& cfg)
{
    return soft_threshold(sum, cfg.lambda_l1) / (count + cfg.lambda_l2);
}

namespace {

// Feature values lie in -4..4.
constexpr int kBinOffset = 4;
constexpr std::size_t kBins = 9;

struct Bin {
    double sum = 0.0;
    double weight = 0.0;
    std::size_t count = 0;
};

struct NodeStats {
    double sum = 0.0;
    double weight = 0.0;
    double sum_sq = 0.0; // sum of w * r^2; scales the gain tolerance
    std::size_t count = 0;
};

using Histogram = std::vector<Bin>; // features.size() * kBins

struct NodeRows {
    std::vector<std::uint32_t> rows;
    std::vector<double> weights; // empty = unit weights

    double weight(std::size_t k) const noexcept { return weights.empty() ? 1.0 : weights[k]; }
};

NodeStats node_stats(const NodeRows& node, std::span<const double> residuals)
{
    NodeStats s;
    for (std::size_t k = 0; k < node.rows.size(); ++k) {
        const double w = node.weight(k);
        const double r = residuals[node.rows[k]];
        s.sum += w * r;
        s.weight += w;
        s.sum_sq += w * r * r;
    }
    s.count = node.rows.size();
    return s;
}

Histogram build_histogram(const FeatureMatrix& x, std::span<const double> residuals, const NodeRows& node,
                          std::span<const std::size_t> features, unsigned workers)
{
    Histogram hist(features.size() * kBins);
    parallel_for(features.size(), workers, [&](std::size_t fi) {
        const auto col = x.column(features[fi]);
        Bin* bins = hist.data() + fi * kBins;
        for (std::size_t k = 0; k < node.rows.size(); ++k) {
            const auto row = node.rows[k];
            const double w = node.weight(k);
            auto& b = bins[static_cast<std::size_t>(col[row] + kBinOffset)];
            b.sum += w * residuals[row];
            b.weight += w;
            ++b.count;
        }
    });
    return hist;
}

Histogram subtract(const Histogram& parent, const Histogram& child)
{
    Histogram out(parent.size());
    for (std::size_t i = 0; i < parent.size(); ++i) {
        out[i].sum = parent[i].sum - child[i].sum;
        out[i].weight = parent[i].weight - child[i].weight;
        out[i].count = parent[i].count - child[i].count;
    }
    return out;
}

double leaf_score(double sum, double weight, const BoostConfig& cfg)
{
    const double t = soft_threshold(sum, cfg.lambda_l1);
    return t * t / (weight + cfg.lambda_l2);
}

std::optional<SplitCandidate> best_from_histogram(const Histogram& hist, std::span<const std::size_t> features,
                                                  const NodeStats& stats, const BoostConfig& cfg)
{
    const auto min_leaf = static_cast<std::size_t>(cfg.min_data_in_leaf);
    if (stats.count < 2 * min_leaf) {
        return std::nullopt;
    }
    const double parent_score = leaf_score(stats.sum, stats.weight, cfg);
    std::vector<SplitCandidate> candidates;
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
        const Bin* bins = hist.data() + fi * kBins;
        std::array<Bin, kBins + 1> suffix{};
        for (std::size_t b = kBins; b-- > 0;) {
            suffix[b].sum = suffix[b + 1].sum + bins[b].sum;
            suffix[b].weight = suffix[b + 1].weight + bins[b].weight;
            suffix[b].count = suffix[b + 1].count + bins[b].count;
        }
        Bin left;
        int prev = -1;
        for (std::size_t b = 0; b < kBins; ++b) {
            if (bins[b].count == 0) {
                continue;
            }
            if (prev >= 0) {
                const auto& right = suffix[b];
                if (left.count >= min_leaf && right.count >= min_leaf) {
                    SplitCandidate c;
                    c.feature = static_cast<int>(features[fi]);
                    c.threshold = 0.5 * static_cast<double>(prev + static_cast<int>(b)) - kBinOffset;
                    c.gain = leaf_score(left.sum, left.weight, cfg) + leaf_score(right.sum, right.weight, cfg) -
                             parent_score;
                    c.left_count = left.count;
                    c.right_count = right.count;
                    candidates.push_back(c);
                }
            }
            left.sum += bins[b].sum;
            left.weight += bins[b].weight;
            left.count += bins[b].count;
            prev = static_cast<int>(b);
        }
    }
    if (candidates.empty()) {
        return std::nullopt;
    }
    double best = candidates.front().gain;
    for (const auto& c : candidates) {
        best = std::max(best, c.gain);
    }
    const double tol = 1e-12 * stats.sum_sq;
    if (best <= tol) {
        return std::nullopt;
    }
    const SplitCandidate* chosen = nullptr;
    for (const auto& c : candidates) {
        if (c.gain >= best - tol) {
            if (chosen == nullptr || c.feature < chosen->feature ||
                (c.feature == chosen->feature && c.threshold < chosen->threshold)) {
                chosen = &c;
            }
        }
    }
    return *chosen;
}

NodeRows to_node_rows(const RowSample& sample)
{
    return {sample.rows, sample.weights};
}

} // namespace

std::optional<SplitCandidate> find_best_split(const FeatureMatrix& x, std::span<const double> residuals,
                                              const RowSample& sample, std::span<const std::size_t> features,
                                              const BoostConfig& cfg)
{
    const auto node = to_node_rows(sample);
    const auto hist = build_histogram(x, residuals, node, features, cfg.workers);
    return best_from_histogram(hist, features, node_stats(node, residuals), cfg);
}

Tree grow_tree(const FeatureMatrix& x, std::span<const double> residuals, const RowSample& sample,
               std::span<const std::size_t> features, const BoostConfig& cfg)
{
    struct Leaf {
        int node = 0;
        int depth = 0;
        NodeRows rows;
        Histogram hist;
        std::optional<SplitCandidate> best;
    };
    const bool depth_limited = cfg.max_depth > 0;
    auto evaluate = [&](Leaf& leaf) {
        leaf.best.reset();
        if (depth_limited && leaf.depth >= cfg.max_depth) {
            return;
        }
        leaf.best = best_from_histogram(leaf.hist, features, node_stats(leaf.rows, residuals), cfg);
    };

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves;
    {
        Leaf root;
        root.rows = to_node_rows(sample);
        root.hist = build_histogram(x, residuals, root.rows, features, cfg.workers);
        evaluate(root);
        leaves.push_back(std::move(root));
    }

    while (leaves.size() < static_cast<std::size_t>(cfg.num_leaves)) {
        std::size_t pick = leaves.size();
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].best && (pick == leaves.size() || leaves[i].best->gain > leaves[pick].best->gain)) {
                pick = i;
            }
        }
        if (pick == leaves.size()) {
            break;
        }
        Leaf parent = std::move(leaves[pick]);
        leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
        const auto split = *parent.best;

        Leaf left;
        Leaf right;
        left.depth = right.depth = parent.depth + 1;
        const auto col = x.column(static_cast<std::size_t>(split.feature));
        const bool weighted = !parent.rows.weights.empty();
        for (std::size_t k = 0; k < parent.rows.rows.size(); ++k) {
            const auto row = parent.rows.rows[k];
            auto& dest = col[row] < split.threshold ? left.rows : right.rows;
            dest.rows.push_back(row);
            if (weighted) {
                dest.weights.push_back(parent.rows.weights[k]);
            }
        }
        left.node = static_cast<int>(tree.nodes.size());
        right.node = left.node + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& pn = tree.nodes[static_cast<std::size_t>(parent.node)];
        pn.feature = split.feature;
        pn.threshold = split.threshold;
        pn.left = left.node;
        pn.right = right.node;

        auto& small = left.rows.rows.size() <= right.rows.rows.size() ? left : right;
        auto& large = &small == &left ? right : left;
        small.hist = build_histogram(x, residuals, small.rows, features, cfg.workers);
        large.hist = subtract(parent.hist, small.hist);
        evaluate(left);
        evaluate(right);
        leaves.push_back(std::move(left));
        leaves.push_back(std::move(right));
    }

    for (const auto& leaf : leaves) {
        const auto s = node_stats(leaf.rows, residuals);
        tree.nodes[static_cast<std::size_t>(leaf.node)].value = leaf_value(s.sum, s.weight, cfg);
    }
    return tree;
}

RowSample goss_sample(std::span<const double> gradients, double top_rate, double other_rate, Rng& rng)
{
    const std::size_t n = gradients.size();
    const auto top = static_cast<std::size_t>(std::ceil(top_rate * static_cast<double>(n) - 1e-9));
    const auto other = static_cast<std::size_t>(std::ceil(other_rate * static_cast<double>(n) - 1e-9));
    if (top + other >= n) {
        return RowSample::all(n);
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::abs(gradients[a]) > std::abs(gradients[b]);
    });
    const std::size_t rest = n - top;
    for (std::size_t k = 0; k < other; ++k) {
        const std::size_t pick = top + k + uniform_below(rng, rest - k);
        std::swap(order[top + k], order[pick]);
    }
    const double amplify = (1.0 - top_rate) / other_rate;
    std::vector<std::pair<std::uint32_t, double>> chosen;
    chosen.reserve(top + other);
    for (std::size_t k = 0; k < top; ++k) {
        chosen.emplace_back(order[k], 1.0);
    }
    for (std::size_t k = top; k < top + other; ++k) {
        chosen.emplace_back(order[k], amplify);
    }
    std::sort(chosen.begin(), chosen.end());
    RowSample s;
    for (const auto& [row, w] : chosen) {
        s.rows.push_back(row);
        s.weights.push_back(w);
    }
    return s;
}

double l2_loss(std::span<const double> prediction, std::span<const double> target)
{
    if (prediction.size() != target.size() || target.empty()) {
        throw ShapeError("l2_loss: size mismatch or empty input");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = target[i] - prediction[i];
        s += d * d;
    }
    return s / static_cast<double>(target.size());
}

BoostState init_boost(const TrainingData& data, const BoostConfig& cfg)
{
    if (data.rows() == 0) {
        throw DataError("empty training data");
    }
    BoostState s;
    s.booster.mode = cfg.mode;
    s.booster.learning_rate = cfg.learning_rate;
    double sum = 0.0;
    for (double y : data.target) {
        sum += y;
    }
    s.booster.f0 = sum / static_cast<double>(data.rows());
    s.train_pred.assign(data.rows(), s.booster.f0);
    return s;
}

namespace {

std::vector<double> residuals_of(const TrainingData& data, std::span<const double> pred)
{
    std::vector<double> r(data.rows());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = data.target[i] - pred[i];
    }
    return r;
}

} // namespace

bool gbdt_step(BoostState& state, const TrainingData& data, const RowSample& sample,
               std::span<const std::size_t> features, const BoostConfig& cfg)
{
    const auto residuals = residuals_of(data, state.train_pred);
    Tree tree = grow_tree(data.features, residuals, sample, features, cfg);
    if (tree.nodes.size() == 1) {
        return false;
    }
    const double scale = state.booster.learning_rate * tree.weight;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        state.train_pred[i] += scale * tree.evaluate(data.features, i);
    }
    state.booster.trees.push_back(std::move(tree));
    return true;
}

void dart_apply(BoostState& state, const TrainingData& data, std::span<const std::size_t> dropped,
                const RowSample& sample, std::span<const std::size_t> features, const BoostConfig& cfg)
{
    auto& trees = state.booster.trees;
    const double lr = state.booster.learning_rate;
    std::vector<double> dropped_pred(data.rows(), 0.0);
    for (auto k : dropped) {
        if (k >= trees.size()) {
            throw ConfigError("dropped tree index out of range");
        }
        const double scale = lr * trees[k].weight;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            dropped_pred[i] += scale * trees[k].evaluate(data.features, i);
        }
    }
    std::vector<double> residuals(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        residuals[i] = data.target[i] - (state.train_pred[i] - dropped_pred[i]);
    }
    Tree tree = grow_tree(data.features, residuals, sample, features, cfg);
    const double k = static_cast<double>(dropped.size());
    tree.weight = 1.0 / (k + 1.0);
    for (auto d : dropped) {
        trees[d].weight *= k / (k + 1.0);
    }
    for (std::size_t i = 0; i < data.rows(); ++i) {
        state.train_pred[i] += lr * tree.weight * tree.evaluate(data.features, i) - dropped_pred[i] / (k + 1.0);
    }
    trees.push_back(std::move(tree));
}

std::vector<std::size_t> dart_step(BoostState& state, const TrainingData& data, const RowSample& sample,
                                   std::span<const std::size_t> features, const BoostConfig& cfg, Rng& rng)
{
    const std::size_t existing = state.booster.trees.size();
    std::vector<std::size_t> dropped;
    if (existing == 0 || uniform01(rng) < cfg.skip_drop) {
        dart_apply(state, data, dropped, sample, features, cfg);
        return dropped;
    }
    for (std::size_t k = 0; k < existing; ++k) {
        if (uniform01(rng) < cfg.drop_rate) {
            dropped.push_back(k);
        }
    }
    if (dropped.empty()) {
        dropped.push_back(static_cast<std::size_t>(uniform_below(rng, existing)));
    }
    dart_apply(state, data, dropped, sample, features, cfg);
    return dropped;
}

namespace {

std::vector<std::size_t> sample_features(std::size_t m, const BoostConfig& cfg, std::uint64_t round)
{
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (cfg.feature_fraction >= 1.0) {
        return all;
    }
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.feature_fraction * static_cast<double>(m))));
    auto rng = make_stream(cfg.seed, "gbdt.features", round);
    for (std::size_t k = 0; k < keep; ++k) {
        std::swap(all[k], all[k + uniform_below(rng, m - k)]);
    }
    all.resize(keep);
    std::sort(all.begin(), all.end());
    return all;
}

RowSample bagging_sample(std::size_t n, const BoostConfig& cfg, std::uint64_t round)
{
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.bagging_fraction * static_cast<double>(n))));
    std::vector<std::uint32_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::uint32_t{0});
    auto rng = make_stream(cfg.seed, "gbdt.bagging", round);
    for (std::size_t k = 0; k < keep; ++k) {
        std::swap(rows[k], rows[k + uniform_below(rng, n - k)]);
    }
    rows.resize(keep);
    std::sort(rows.begin(), rows.end());
    RowSample s;
    s.rows = std::move(rows);
    return s;
}

} // namespace

Booster train(const TrainingData& data, const BoostConfig& cfg, const TrainingData* validation, TrainReport* report)
{
    cfg.validate();
    auto state = init_boost(data, cfg);
    TrainReport local;
    TrainReport& rep = report != nullptr ? *report : local;
    rep = TrainReport{};

    const bool early_stop = cfg.mode == BoostMode::Gbdt && validation != nullptr && cfg.early_stopping_patience > 0;
    std::vector<double> valid_pred;
    if (validation != nullptr) {
        if (validation->features.cols() != data.features.cols()) {
            throw ShapeError("validation data has a different feature count");
        }
        valid_pred.assign(validation->rows(), state.booster.f0);
    }
    const bool use_bagging = cfg.bagging_freq > 0 && cfg.bagging_fraction < 1.0 &&
                             (cfg.mode == BoostMode::Gbdt || cfg.bagging_in_all_modes);
    const std::size_t m = data.features.cols();
    RowSample bag = RowSample::all(data.rows());
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t best_trees = 0;

    for (int round = 0; round < cfg.n_estimators; ++round) {
        const auto r = static_cast<std::uint64_t>(round);
        const auto features = sample_features(m, cfg, r);
        if (use_bagging && round % cfg.bagging_freq == 0) {
            bag = bagging_sample(data.rows(), cfg, r);
        }
        const std::size_t trees_before = state.booster.trees.size();
        std::vector<std::size_t> dropped;
        bool grew = true;
        switch (cfg.mode) {
        case BoostMode::Gbdt:
            grew = gbdt_step(state, data, bag, features, cfg);
            break;
        case BoostMode::Goss: {
            const auto grad = residuals_of(data, state.train_pred);
            auto rng = make_stream(cfg.seed, "gbdt.goss", r);
            const auto sample = use_bagging ? bag : goss_sample(grad, cfg.top_rate, cfg.other_rate, rng);
            grew = gbdt_step(state, data, sample, features, cfg);
            break;
        }
        case BoostMode::Dart: {
            auto rng = make_stream(cfg.seed, "gbdt.dart", r);
            dropped = dart_step(state, data, bag, features, cfg, rng);
            break;
        }
        }
        if (!grew && cfg.mode == BoostMode::Gbdt && !use_bagging && cfg.feature_fraction >= 1.0) {
            break; // nothing changed, so no later round can split either
        }
        rep.train_loss.push_back(l2_loss(state.train_pred, data.target));

        if (validation != nullptr) {
            if (cfg.mode == BoostMode::Dart) {
                valid_pred = state.booster.predict(validation->features);
            } else if (state.booster.trees.size() > trees_before) {
                const auto& tree = state.booster.trees.back();
                const double scale = state.booster.learning_rate * tree.weight;
                for (std::size_t i = 0; i < valid_pred.size(); ++i) {
                    valid_pred[i] += scale * tree.evaluate(validation->features, i);
                }
            }
            const double vloss = l2_loss(valid_pred, validation->target);
            rep.validation_loss.push_back(vloss);
            if (vloss < best_loss) {
                best_loss = vloss;
                best_trees = state.booster.trees.size();
                rep.best_iteration = round + 1;
            } else if (early_stop && round + 1 - rep.best_iteration >= cfg.early_stopping_patience) {
                rep.stopped_early = true;
                state.booster.trees.resize(best_trees);
                break;
            }
        }
    }
    if (validation == nullptr) {
        rep.best_iteration = static_cast<int>(rep.train_loss.size());
    }
    return std::move(state.booster);
}

Booster train(const PanelSet& train_panel, std::string_view target, const BoostConfig& cfg,
              const PanelSet* validation, TrainReport* report)
{
    const auto data = TrainingData::from_panel(train_panel, target);
    if (validation != nullptr && !validation->empty()) {
        const auto valid = TrainingData::from_panel(*validation, target);
        return train(data, cfg, &valid, report);
    }
    return train(data, cfg, nullptr, report);
}

} // namespace tempora
