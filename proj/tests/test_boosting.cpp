#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "isv/boosting.hpp"
#include "isv/error.hpp"
#include "isv/pipeline.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace isv;

namespace {

double weighted_error(const Stump& s, const std::vector<double>& x, const std::vector<int>& y,
                      const std::vector<double>& w) {
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (s.predict(x[i]) != y[i]) e += w[i];
    return e;
}

std::vector<double> uniform(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

}  // namespace

TEST_CASE("stump examples") {
    SUBCASE("separable values") {
        const std::vector<double> x{0.1, 0.2, 0.8, 0.9};
        const std::vector<int> y{1, 1, -1, -1};
        const auto fit = train_stump(x, y, uniform(4));
        CHECK(fit.error == 0.0);
        CHECK(fit.stump.threshold == doctest::Approx(0.5));
        CHECK(fit.stump.polarity == 1);
    }
    SUBCASE("reversed orientation") {
        const std::vector<double> x{0.1, 0.2, 0.8, 0.9};
        const std::vector<int> y{-1, -1, 1, 1};
        const auto fit = train_stump(x, y, uniform(4));
        CHECK(fit.error == 0.0);
        CHECK(fit.stump.polarity == -1);
        CHECK(fit.stump.predict(0.85) == 1);
    }
    SUBCASE("one class uses a sentinel threshold") {
        const std::vector<double> x{0.3, 0.1, 0.7};
        const std::vector<int> y{1, 1, 1};
        const auto fit = train_stump(x, y, uniform(3));
        CHECK(fit.error == 0.0);
        for (double v : x) CHECK(fit.stump.predict(v) == 1);
    }
    SUBCASE("identical values give the lighter class weight") {
        const std::vector<double> x{2.0, 2.0, 2.0, 2.0};
        const std::vector<int> y{1, -1, -1, 1};
        const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
        CHECK(train_stump(x, y, w).error == doctest::Approx(0.5));
        const std::vector<double> w2{0.1, 0.2, 0.3, 0.15};
        CHECK(train_stump(x, y, w2).error == doctest::Approx(0.25));
    }
    SUBCASE("alternating labels") {
        const std::vector<double> x{1, 2, 3, 4, 5, 6};
        const std::vector<int> y{1, -1, 1, -1, 1, -1};
        const auto fit = train_stump(x, y, uniform(6));
        CHECK(fit.error == doctest::Approx(oracle::exhaustive_stump(x, y, uniform(6)).error));
        CHECK(fit.error == doctest::Approx(2.0 / 6.0));
        for (std::size_t n = 2; n <= 12; ++n) {
            std::vector<double> xs(n);
            std::vector<int> ys(n);
            for (std::size_t i = 0; i < n; ++i) {
                xs[i] = static_cast<double>(i);
                ys[i] = i % 2 ? -1 : 1;
            }
            CHECK(train_stump(xs, ys, uniform(n)).error <= 0.5 - 1.0 / (2.0 * n) + 1e-12);
        }
    }
    SUBCASE("input errors") {
        const std::vector<double> x{1.0, 2.0};
        CHECK_THROWS_AS(train_stump({}, {}, {}), Error);
        CHECK_THROWS_AS(train_stump(x, std::vector<int>{1, 0}, uniform(2)), Error);
        CHECK_THROWS_AS(train_stump(x, std::vector<int>{1}, uniform(2)), Error);
        CHECK_THROWS_AS(train_stump(x, std::vector<int>{1, -1}, std::vector<double>{0.5, 0.0}), Error);
        const std::vector<double> bad{1.0, std::numeric_limits<double>::quiet_NaN()};
        CHECK_THROWS_AS(train_stump(bad, std::vector<int>{1, -1}, uniform(2)), Error);
    }
}

TEST_CASE("stump search matches the exhaustive oracle") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> level(0, 6);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + trial % 15;
        std::vector<double> x(n), w(n);
        std::vector<int> y(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = level(rng) * 0.25;  // many ties
            y[i] = u(rng) < 0.5 ? 1 : -1;
            w[i] = u(rng);
            total += w[i];
        }
        for (double& v : w) v /= total;
        const auto fit = train_stump(x, y, w);
        const auto want = oracle::exhaustive_stump(x, y, w);
        CHECK(fit.error == doctest::Approx(want.error).epsilon(1e-12));
        CHECK(weighted_error(fit.stump, x, y, w) == doctest::Approx(fit.error).epsilon(1e-12));
        CHECK(fit.error <= 0.5 + 1e-12);
    }
}

TEST_CASE("adaboost picks the informative feature") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> v;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        std::vector<double> row(6);
        for (double& r : row) r = noise(rng);
        row[3] = (label > 0 ? 0.0 : 2.0) + 0.3 * noise(rng);
        v.push_back(row);
        y.push_back(label);
    }
    const auto result = train_adaboost(v, y, {.rounds = 5});
    REQUIRE_FALSE(result.model.stumps.empty());
    CHECK(result.model.stumps.front().feature == 3);
    CHECK(result.model.stumps.front().polarity == 1);
}

TEST_CASE("adaboost guarantees") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> v;
    std::vector<int> y;
    for (int i = 0; i < 120; ++i) {
        const int label = i < 60 ? 1 : -1;
        std::vector<double> row(10);
        for (std::size_t d = 0; d < row.size(); ++d) row[d] = noise(rng) + (label > 0 ? 0.0 : 0.4 * (d % 3));
        v.push_back(row);
        y.push_back(label);
    }
    const auto result = train_adaboost(v, y, {.rounds = 40});
    CHECK(result.rounds.size() == result.model.stumps.size());
    for (const auto& r : result.rounds) {
        CHECK(r.error < 0.5);
        CHECK(r.alpha > 0.0);
        CHECK(std::abs(r.weight_sum - 1.0) < 1e-12);
        CHECK(r.min_weight > 0.0);
        CHECK(r.training_error <= r.loss_bound + 1e-12);
    }
    CHECK(result.model.feature_dimension == 10);

    const auto again = train_adaboost(v, y, {.rounds = 40});
    REQUIRE(again.model.stumps.size() == result.model.stumps.size());
    for (std::size_t t = 0; t < again.model.stumps.size(); ++t) {
        CHECK(again.model.stumps[t].feature == result.model.stumps[t].feature);
        CHECK(again.model.stumps[t].threshold == result.model.stumps[t].threshold);
        CHECK(again.model.stumps[t].alpha == result.model.stumps[t].alpha);
    }

    const auto threaded = train_adaboost(v, y, {.rounds = 40, .workers = 3});
    for (std::size_t t = 0; t < threaded.model.stumps.size(); ++t)
        CHECK(threaded.model.stumps[t].alpha == result.model.stumps[t].alpha);
}

TEST_CASE("adaboost on separable data") {
    std::vector<std::vector<double>> v{{0.1, 5.0}, {0.2, 1.0}, {0.3, 3.0}, {0.7, 2.0}, {0.8, 4.0}, {0.9, 0.0}};
    const std::vector<int> y{1, 1, 1, -1, -1, -1};
    const auto result = train_adaboost(v, y, {.rounds = 10});
    REQUIRE_FALSE(result.rounds.empty());
    CHECK(result.rounds.front().error == 0.0);
    CHECK(result.rounds.front().alpha == doctest::Approx(0.5 * std::log((1 - 1e-10) / 1e-10)));
    CHECK(result.rounds.back().training_error == 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(result.model.classify(v[i]).matched == (y[i] > 0));
}

TEST_CASE("adaboost input errors") {
    CHECK_THROWS_AS(train_adaboost({}, {}, {}), Error);
    const std::vector<std::vector<double>> v{{0.0}, {1.0}};
    CHECK_THROWS_AS(train_adaboost(v, std::vector<int>{1, 1}, {}), Error);
    CHECK_THROWS_AS(train_adaboost(v, std::vector<int>{1}, {}), Error);
    CHECK_THROWS_AS(train_adaboost({{0.0}, {1.0, 2.0}}, std::vector<int>{1, -1}, {}), Error);
    CHECK_THROWS_AS(train_adaboost(v, std::vector<int>{1, -1}, {.rounds = 0}), Error);
}

TEST_CASE("classification rule") {
    VerificationModel m;
    m.feature_dimension = 3;
    m.stumps = {{0, 0.5, 1, 0.8, }, {2, 1.0, -1, 0.3}};
    m.tau = 0.2;
    const std::vector<double> x{0.1, 9.0, 0.5};  // h0 = +1, h1 = -1
    CHECK(m.score(x) == doctest::Approx(0.5));
    CHECK(m.classify(x).matched);
    m.tau = 0.5;
    CHECK(m.classify(x).matched);  // ties go to matched
    m.tau = 0.51;
    CHECK_FALSE(m.classify(x).matched);
    CHECK(m.unique_features() == 2);
    CHECK_THROWS_AS(m.score(std::vector<double>{1.0}), Error);
}

TEST_CASE("threshold tuning") {
    SUBCASE("gap midpoint") {
        const std::vector<double> s{1.0, 2.0, -1.0, -3.0};
        const std::vector<int> y{1, 1, -1, -1};
        CHECK(tune_threshold(s, y) == doctest::Approx(0.0));
        const std::vector<double> s2{3.0, 4.0, 1.0, 2.0};
        CHECK(tune_threshold(s2, y) == doctest::Approx(2.5));
    }
    SUBCASE("identical scores fall back to zero") {
        const std::vector<double> s{0.7, 0.7, 0.7};
        const std::vector<int> y{1, -1, -1};
        CHECK(tune_threshold(s, y) == 0.0);
    }
    SUBCASE("brute-force sweep agrees on accuracy") {
        std::mt19937_64 rng(41);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> s(30);
            std::vector<int> y(30);
            for (std::size_t i = 0; i < s.size(); ++i) {
                y[i] = i % 3 == 0 ? 1 : -1;
                s[i] = std::round(4 * (n(rng) + 0.7 * y[i])) / 4;
            }
            auto acc_at = [&](double tau) {
                std::vector<int> p(s.size());
                for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[i] >= tau ? 1 : -1;
                return balanced_accuracy(p, y);
            };
            double best = 0.0;
            for (double t = -10.0; t <= 10.0; t += 0.125) best = std::max(best, acc_at(t));
            CHECK(acc_at(tune_threshold(s, y)) == doctest::Approx(best).epsilon(1e-14));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(tune_threshold({}, {}), Error);
        CHECK_THROWS_AS(tune_threshold(std::vector<double>{1.0}, std::vector<int>{1}), Error);
    }
}

TEST_CASE("balanced accuracy arithmetic") {
    // 3 matched (2 right), 2 mismatched (2 right) -> (2/3 + 1) / 2
    const std::vector<int> y{1, 1, 1, -1, -1};
    const std::vector<int> p{1, 1, -1, -1, -1};
    CHECK(balanced_accuracy(p, y) == doctest::Approx(5.0 / 6.0));

    VerificationModel m;
    m.feature_dimension = 1;
    m.stumps = {{0, 0.5, 1, 1.0}};
    LabeledVectors data{{{0.1}, {0.2}, {0.9}, {0.3}}, {1, 1, -1, -1}};
    const auto r = evaluate(m, data);
    CHECK(r.matched_accuracy == 100.0);
    CHECK(r.mismatched_accuracy == 50.0);
    CHECK(r.balanced_accuracy == 75.0);
    CHECK(r.scores.size() == 4);
}

TEST_CASE("weight map") {
    LayoutParams lp{64, 64, 24, 4, {4, 8, 12}};
    const RegionLayout layout(lp);
    const std::size_t k = 4;

    SUBCASE("single direct region") {
        VerificationModel m;
        m.stumps = {{encode_feature({0, 1}, k), 0.0, 1, 0.7}};
        const auto map = cumulative_weight_map(m, layout, k, 64, 64);
        CHECK(map.at(0, 0) == doctest::Approx(0.7));
        CHECK(map.at(23, 23) == doctest::Approx(0.7));
        CHECK(map.at(24, 0) == 0.0);
        CHECK(map.at(0, 24) == 0.0);
    }
    SUBCASE("overlapping regions add") {
        VerificationModel m;
        m.stumps = {{0, 0.0, 1, 0.5}, {encode_feature({1, 0}, k), 0.0, 1, 0.25}, {2, 0.0, 1, 0.1}};
        const auto map = cumulative_weight_map(m, layout, k, 64, 64);
        CHECK(map.at(2, 2) == doctest::Approx(0.6));   // region 0 twice
        CHECK(map.at(10, 10) == doctest::Approx(0.85)); // regions 0 and 1
        CHECK(map.at(26, 5) == doctest::Approx(0.25));  // region 1 only
    }
    SUBCASE("compound covers the union of its cells") {
        const std::size_t j = layout.direct().size();  // first horizontal compound
        VerificationModel m;
        m.stumps = {{encode_feature({j, 2}, k), 0.0, 1, 1.5}};
        const auto map = cumulative_weight_map(m, layout, k, 64, 64);
        const auto cells = layout.cells_of(j);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                bool inside = false;
                for (const auto& c : cells) inside |= c.contains(x, y);
                CHECK(map.at(x, y) == (inside ? 1.5 : 0.0));
            }
    }
    SUBCASE("files") {
        test::TempDir dir;
        VerificationModel m;
        m.stumps = {{0, 0.0, 1, 2.0}, {4, 0.0, 1, 1.0}};
        const auto map = cumulative_weight_map(m, layout, k, 64, 64);
        save_weight_map(map, dir / "w.pgm");
        const auto img = load_image(dir / "w.pgm");
        CHECK(img.at(10, 0) == 1.0);  // overlap holds the peak
        CHECK(img.at(0, 0) == doctest::Approx(170.0 / 255.0));
        CHECK(img.at(63, 63) == 0.0);
        CHECK(std::filesystem::file_size(dir / "w.f32") == 64 * 64 * 4);
    }
    SUBCASE("errors") {
        VerificationModel m;
        CHECK_THROWS_AS(cumulative_weight_map(m, layout, k, 64, 64), Error);
        m.stumps = {{layout.size() * k, 0.0, 1, 1.0}};
        CHECK_THROWS_AS(cumulative_weight_map(m, layout, k, 64, 64), Error);
    }
}
