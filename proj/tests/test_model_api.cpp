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
#include "tempora/model_api.hpp"

#include <doctest.h>

#include <cmath>

using namespace tempora;

namespace {

// Signs from the mean per-era feature Corr over the last `window` resolved eras.
std::vector<double> momentum_oracle(const PanelSet& p, std::size_t last_pos, int window, const PanelEra& era)
{
    const std::size_t m = p.schema.feature_count();
    std::vector<double> mean(m, 0.0);
    int used = 0;
    for (std::size_t e = last_pos + 1; e-- > 0 && used < window;) {
        for (std::size_t f = 0; f < m; ++f) {
            mean[f] += era_corr(p.eras[e].features.column(f), target_values(p.eras[e], "target"));
        }
        ++used;
    }
    std::vector<double> out(era.rows(), 0.0);
    for (std::size_t f = 0; f < m; ++f) {
        const double s = mean[f] > 0 ? 1.0 : (mean[f] < 0 ? -1.0 : 0.0);
        for (std::size_t i = 0; i < era.rows(); ++i) {
            out[i] += s * era.features(i, f);
        }
    }
    return out;
}

} // namespace

TEST_CASE("factor momentum follows the lagged windowed signs")
{
    const auto p = generate_synthetic(testing::small_synthetic(40, 3));
    FactorMomentumModel model(10, 6);
    PanelSet train{p.schema, {p.eras.begin(), p.eras.begin() + 20}};
    model.fit(train, "target", 0);
    for (std::size_t e = 20; e < 40; ++e) {
        const auto got = model.predict(p.eras[e]);
        // era index e+1 uses eras <= e+1-6, i.e. positions <= e-6
        const auto want = momentum_oracle(p, e - 6, 10, p.eras[e]);
        CHECK(got == want);
        model.observe(p.eras[e]);
    }
}

TEST_CASE("factor momentum ignores eras after t - lag")
{
    auto p = generate_synthetic(testing::small_synthetic(30, 4));
    FactorMomentumModel a(52, 6);
    a.fit(p, "target", 0);
    const auto before = a.predict(p.eras[29]);

    for (std::size_t e = 24; e < 30; ++e) {
        auto& y = p.eras[e].targets["target"];
        for (auto& v : y) {
            v = -v;
        }
        for (std::size_t c = 0; c < p.schema.feature_count(); ++c) {
            if (e != 29) {
                for (auto& v : p.eras[e].features.column(c)) {
                    v = static_cast<std::int8_t>(-v);
                }
            }
        }
    }
    FactorMomentumModel b(52, 6);
    b.fit(p, "target", 0);
    CHECK(b.predict(p.eras[29]) == before);
}

TEST_CASE("factor momentum without lagged history is not ready")
{
    const auto p = testing::random_panel(5, 10, 3, 1);
    FactorMomentumModel m(52, 6);
    m.fit(p, "target", 0);
    CHECK_THROWS_AS(m.predict(p.eras[4]), NotReadyError);
}

TEST_CASE("gbdt model predictions never read the era's target")
{
    auto p = generate_synthetic(testing::small_synthetic(10, 5));
    BoostConfig cfg;
    cfg.n_estimators = 10;
    GbdtModel m(cfg);
    m.fit(p, "target", 3);
    auto era = p.eras[9];
    const auto a = m.predict(era);
    era.targets.clear();
    CHECK(m.predict(era) == a);
}

TEST_CASE("rank-only scoring: a monotone transform leaves a member's Corr unchanged")
{
    const auto p = generate_synthetic(testing::small_synthetic(12, 6));
    BoostConfig cfg;
    cfg.n_estimators = 20;
    GbdtModel m(cfg);
    m.fit(PanelSet{p.schema, {p.eras.begin(), p.eras.begin() + 8}}, "target", 1);
    for (std::size_t e = 8; e < 12; ++e) {
        auto s = m.predict(p.eras[e]);
        const auto y = target_values(p.eras[e], "target");
        const double c = era_corr(s, y);
        for (auto& v : s) {
            v = std::atan(50.0 * v) + 3.0;
        }
        CHECK(era_corr(s, y) == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("averaging")
{
    const std::vector<std::vector<double>> members{{1.0, 2.0}, {3.0, 6.0}};
    CHECK(average_predictions(members) == std::vector<double>{2.0, 4.0});
    CHECK_THROWS_AS(average_predictions(std::vector<std::vector<double>>{}), ShapeError);
    CHECK_THROWS_AS(average_predictions(std::vector<std::vector<double>>{{1.0}, {1.0, 2.0}}), ShapeError);

    const std::vector<CorrSeries> series{
        {{EraId{1}, 0.1}, {EraId{2}, 0.3}},
        {{EraId{1}, 0.0}, {EraId{2}, 0.2}},
    };
    const auto s = average_metrics(series);
    CHECK(s.mean == doctest::Approx(0.15));
    CHECK(s.volatility == doctest::Approx(0.1));
    const std::vector<CorrSeries> misaligned{{{EraId{1}, 0.1}, {EraId{2}, 0.3}}, {{EraId{1}, 0.1}, {EraId{3}, 0.2}}};
    CHECK_THROWS_AS(average_metrics(misaligned), ShapeError);
}

TEST_CASE("multi-target average needs a model per target")
{
    const auto p = generate_synthetic(testing::small_synthetic(10, 7));
    BoostConfig cfg;
    cfg.n_estimators = 5;
    GbdtModel a(cfg);
    a.fit(p, "target", 1);
    GbdtModel b(cfg);
    b.fit(p, "target", 2);
    std::map<std::string, const RankingModel*, std::less<>> models{{"x", &a}, {"y", &b}};
    const std::vector<std::string> targets{"x", "y"};
    const auto avg = multi_target_average(models, targets, p.eras[0]);
    const auto pa = a.predict(p.eras[0]);
    const auto pb = b.predict(p.eras[0]);
    for (std::size_t i = 0; i < avg.size(); ++i) {
        CHECK(avg[i] == doctest::Approx((pa[i] + pb[i]) / 2));
    }
    const std::vector<std::string> missing{"x", "z"};
    CHECK_THROWS_AS(multi_target_average(models, missing, p.eras[0]), ConfigError);
}
