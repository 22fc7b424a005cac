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

// Reference implementations used only by tests. Written directly from the definitions,
// without sharing code paths with the library.

#include "tempora/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace tempora::testing {

struct StumpOracle {
    bool split = false;
    int feature = -1;
    double threshold = 0.0;
    double left_value = 0.0;
    double right_value = 0.0;
    double root_value = 0.0;
};

inline double mean_in_order(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

inline double sse(const std::vector<double>& v)
{
    if (v.empty()) {
        return 0.0;
    }
    const double m = mean_in_order(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s;
}

// Exhaustive best single split of residuals r = y - mean(y): every feature, every midpoint
// between adjacent distinct values, largest SSE reduction; ties to lowest feature then
// lowest threshold.
inline StumpOracle brute_force_stump(const FeatureMatrix& x, const std::vector<double>& y, std::size_t min_leaf)
{
    const std::size_t n = y.size();
    const double f0 = mean_in_order(y);
    std::vector<double> r(n);
    double total_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = y[i] - f0;
        total_sq += r[i] * r[i];
    }
    const double parent = sse(r);
    StumpOracle best;
    double best_gain = 0.0;
    const double tol = 1e-12 * total_sq;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::set<int> values;
        for (std::size_t i = 0; i < n; ++i) {
            values.insert(x(i, f));
        }
        std::vector<int> sorted(values.begin(), values.end());
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            const double thr = 0.5 * (sorted[k] + sorted[k + 1]);
            std::vector<double> left;
            std::vector<double> right;
            for (std::size_t i = 0; i < n; ++i) {
                (x(i, f) < thr ? left : right).push_back(r[i]);
            }
            if (left.size() < min_leaf || right.size() < min_leaf) {
                continue;
            }
            const double gain = parent - sse(left) - sse(right);
            if (gain > best_gain + tol) {
                best_gain = gain;
                best.split = true;
                best.feature = static_cast<int>(f);
                best.threshold = thr;
                best.left_value = mean_in_order(left);
                best.right_value = mean_in_order(right);
            }
        }
    }
    if (best_gain <= tol) {
        best = {};
        best.root_value = mean_in_order(r);
    }
    return best;
}

// Walks a tree node by node.
inline double walk(const Tree& t, const FeatureMatrix& x, std::size_t row)
{
    std::size_t node = 0;
    while (t.nodes[node].feature >= 0) {
        const auto& n = t.nodes[node];
        node = static_cast<std::size_t>(x(row, static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right);
    }
    return t.nodes[node].value;
}

inline std::vector<double> suffix_sum_prediction(const Booster& b, const FeatureMatrix& x, std::size_t skip)
{
    std::vector<double> out(x.rows(), b.f0);
    for (std::size_t k = skip; k < b.trees.size(); ++k) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            out[i] += b.learning_rate * b.trees[k].weight * walk(b.trees[k], x, i);
        }
    }
    return out;
}

} // namespace tempora::testing
