// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "isv/boosting.hpp"
#include "isv/config.hpp"
#include "isv/dataio.hpp"
#include "isv/metrics.hpp"
#include "isv/model_file.hpp"
#include "isv/pipeline.hpp"
#include "isv/regions.hpp"
#include "isv/similarity.hpp"
#include "isv/synth.hpp"
#include "isv/texture.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace isv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= budget_s) {
        out.pass = false;
        out.detail += " [over budget " + std::to_string(budget_s) + " s]";
    }
    if (!out.pass) ++failures;
    std::printf("[%s] criterion %d: %s (%.2f s) %s\n", out.pass ? "PASS" : "FAIL", id, name, secs,
                out.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// 1 ---------------------------------------------------------------------------

Outcome region_counts() {
    const RegionLayout layout(LayoutParams{64, 64, 24, 1, {4, 8, 12}});
    const std::size_t direct = layout.direct().size();
    const std::size_t compound = layout.compound().size();
    const std::size_t h = layout.count(CompoundShape::horizontal);
    const std::size_t v = layout.count(CompoundShape::vertical);
    const std::size_t x = layout.count(CompoundShape::cross);
    const std::size_t dim = default_metric_suite().size() * layout.size();
    const bool ok = direct == 1681 && compound == 8153 && h == 3075 && v == 3075 && x == 2003 &&
                    layout.size() == 9834 && dim == 39336;
    char buf[160];
    std::snprintf(buf, sizeof buf, "direct=%zu compound=%zu (h=%zu v=%zu x=%zu) nu=%zu dim=%zu", direct, compound, h,
                  v, x, layout.size(), dim);
    return {ok, buf};
}

// 2 ---------------------------------------------------------------------------

Outcome metric_oracles() {
    std::mt19937_64 rng(2024);
    double worst_angle = 0.0, worst_formula = 0.0;
    int point_mismatch = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = test::random_matrix(rng, 10, 3);
        const auto b = test::random_matrix(rng, 10, 3);
        if (hausdorff_distance(a, b) != oracle::hausdorff(a, b)) ++point_mismatch;
        if (modified_hausdorff_distance(a, b) != oracle::modified_hausdorff(a, b)) ++point_mismatch;

        const auto angles = principal_angles(orthonormal_basis(a), orthonormal_basis(b));
        const auto want =
            oracle::greedy_principal_angles(oracle::gram_schmidt(a), oracle::gram_schmidt(b));
        if (angles.size() != want.size()) return {false, "angle count differs"};
        for (std::size_t i = 0; i < angles.size(); ++i)
            worst_angle = std::max(worst_angle, std::abs(angles[i] - want[i]));
        worst_formula = std::max(worst_formula, std::abs(geodesic_distance(angles) - oracle::geodesic(angles)));
        worst_formula =
            std::max(worst_formula, std::abs(binet_cauchy_distance(angles) - oracle::binet_cauchy(angles)));
    }
    const bool ok = point_mismatch == 0 && worst_angle <= 1e-6 && worst_formula <= 1e-12;
    return {ok, fmt("HD/MHD mismatches=%.0f max angle err=%.2e max d_G/d_BC err=%.2e", point_mismatch, worst_angle,
                    worst_formula)};
}

// 3 ---------------------------------------------------------------------------

Outcome pooling_equivalence() {
    const auto config = PipelineConfig::desk();
    const RegionLayout layout(config.layout());
    const auto grid = BlockGrid::for_image(64, 64, config.block_size, config.block_step);
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (int img = 0; img < 50; ++img) {
        Eigen::MatrixXd hist = test::random_matrix(rng, grid.count(), config.components);
        for (Eigen::Index r = 0; r < hist.rows(); ++r) hist.row(r) /= hist.row(r).sum();
        const IntegralHistogram integral(grid, hist);
        Eigen::MatrixXd naive(config.components, static_cast<Eigen::Index>(layout.direct().size()));
        for (std::size_t j = 0; j < layout.direct().size(); ++j) {
            const auto& reg = layout.direct()[j];
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(config.components);
            int n = 0;
            for (int r = 0; r < grid.rows; ++r)
                for (int c = 0; c < grid.cols; ++c) {
                    const int x0 = c * grid.step, y0 = r * grid.step;
                    if (x0 >= reg.x && y0 >= reg.y && x0 + grid.size <= reg.x + reg.size &&
                        y0 + grid.size <= reg.y + reg.size) {
                        sum += hist.row(r * grid.cols + c).transpose();
                        ++n;
                    }
                }
            naive.col(static_cast<Eigen::Index>(j)) = sum / n;
            const auto fast = integral.direct_descriptor(reg);
            worst = std::max(worst, (fast - naive.col(static_cast<Eigen::Index>(j))).cwiseAbs().maxCoeff());
        }
        for (const auto& spec : layout.compound()) {
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(config.components);
            for (auto cell : spec.cells) sum += naive.col(static_cast<Eigen::Index>(cell));
            worst = std::max(worst, (compound_descriptor(naive, spec) - sum).cwiseAbs().maxCoeff());
        }
    }
    return {worst <= 1e-10, fmt("50 images, max abs diff=%.2e", worst)};
}

// 4 ---------------------------------------------------------------------------

Outcome em_monotonicity() {
    double worst_drop = 0.0, worst_sum = 0.0;
    int total_iters = 0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto data = synth_dataset(4, 2, 3, seed);
        auto config = PipelineConfig::desk();
        config.components = 16;
        config.dictionary_seed = seed;
        config.max_dictionary_samples = 4000;
        const auto pool = pool_descriptors(data.train.sets, config);
        auto opts = config.dictionary_options();
        opts.max_iters = 100;
        opts.tol = 1e-12;
        const auto result = train_dictionary(pool, opts);
        total_iters += result.iterations;
        for (std::size_t i = 1; i < result.log_likelihood.size(); ++i)
            worst_drop = std::max(worst_drop, result.log_likelihood[i - 1] - result.log_likelihood[i]);
        const auto post = result.dictionary.posteriors(pool);
        for (Eigen::Index r = 0; r < post.rows(); ++r)
            worst_sum = std::max(worst_sum, std::abs(post.row(r).sum() - 1.0));
    }
    return {worst_drop <= 1e-9 && worst_sum <= 1e-12,
            fmt("3 pools, %.0f EM iterations, max LL drop=%.2e, max |sum-1|=%.2e", total_iters, worst_drop,
                worst_sum)};
}

// 5 ---------------------------------------------------------------------------

Outcome boosting_guarantees() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);

    // Noisy data for the round-wise guarantees.
    std::vector<std::vector<double>> v;
    std::vector<int> y;
    for (int i = 0; i < 400; ++i) {
        const int label = i % 2 ? 1 : -1;
        std::vector<double> row(20);
        for (std::size_t d = 0; d < row.size(); ++d) row[d] = noise(rng) + (label > 0 ? 0.15 * (d % 4) : 0.0);
        v.push_back(row);
        y.push_back(label);
    }
    const auto noisy = train_adaboost(v, y, {.rounds = 60});
    bool eps_ok = true, bound_ok = true;
    for (const auto& r : noisy.rounds) {
        eps_ok &= r.error < 0.5;
        bound_ok &= r.training_error <= r.loss_bound;
    }

    // Two features, only the second informative.
    std::vector<std::vector<double>> two;
    std::vector<int> y2;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2 ? 1 : -1;
        two.push_back({noise(rng), (label > 0 ? 0.0 : 1.5) + 0.5 * noise(rng)});
        y2.push_back(label);
    }
    const auto pick = train_adaboost(two, y2, {.rounds = 1});
    const bool picks_informative = pick.model.stumps.front().feature == 1;

    // Matched iff inside an axis-aligned box: separable, but not by one stump.
    std::vector<std::vector<double>> sep;
    std::vector<int> y3;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double a = u(rng), b = u(rng);
        const bool matched = a < 0.5 && b < 0.7;
        sep.push_back({a, b});
        y3.push_back(matched ? 1 : -1);
    }
    const auto separable = train_adaboost(sep, y3, {.rounds = 10});
    int rounds_needed = -1;
    for (std::size_t t = 0; t < separable.rounds.size(); ++t)
        if (separable.rounds[t].training_error == 0.0) {
            rounds_needed = static_cast<int>(t) + 1;
            break;
        }

    const bool ok = eps_ok && bound_ok && picks_informative && rounds_needed > 0;
    return {ok, std::string("eps<0.5 ") + (eps_ok ? "yes" : "no") + ", bound>=error " + (bound_ok ? "yes" : "no") +
                    ", round1 picks informative " + (picks_informative ? "yes" : "no") +
                    ", separable 100% after " + std::to_string(rounds_needed) + " rounds"};
}

// 6-8 -------------------------------------------------------------------------

struct EndToEnd {
    std::string model_text;
    double eval_accuracy = 0.0;
    double shifted_accuracy = 0.0;
    double dev_accuracy = 0.0;
};

struct Prepared {
    SynthDataset data;
    VisualDictionary dictionary;
};

Prepared prepare(std::uint64_t seed) {
    SynthParams params;
    params.seed = seed;
    Prepared p{synth_dataset(params), {}};
    const auto config = PipelineConfig::desk();
    p.dictionary = train_dictionary(p.data.train.sets, config).dictionary;
    return p;
}

// Every eval set gets its own +/-2 px translation in x and y.
std::vector<ImageSet> shifted_sets(const std::vector<ImageSet>& sets) {
    std::vector<ImageSet> out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const int dx = (i % 2) ? 2 : -2;
        const int dy = (i / 2 % 2) ? 2 : -2;
        ImageSet s{sets[i].id, {}};
        for (const auto& img : sets[i].images) s.images.push_back(translate_image(img, dx, dy));
        out.push_back(std::move(s));
    }
    return out;
}

EndToEnd end_to_end(const Prepared& p, const MetricSuite& suite, bool with_shift) {
    auto config = PipelineConfig::desk();
    config.metrics = suite;
    const FeatureExtractor extractor(config, p.dictionary);
    const auto dev_features = extractor.extract_all(p.data.dev.sets);
    const auto eval_features = extractor.extract_all(p.data.eval.sets);
    const auto dev = pair_vectors(dev_features, p.data.dev.pairs, suite);
    const auto eval = pair_vectors(eval_features, p.data.eval.pairs, suite);

    const auto model = train_model(extractor, dev, dev);
    EndToEnd out;
    out.model_text = serialize_model(model);
    out.dev_accuracy = evaluate(model.verifier, dev).balanced_accuracy;
    out.eval_accuracy = evaluate(model.verifier, eval).balanced_accuracy;
    if (with_shift) {
        const auto moved = extractor.extract_all(shifted_sets(p.data.eval.sets));
        LabeledVectors shifted;
        for (const auto& pair : p.data.eval.pairs) {
            shifted.vectors.push_back(similarity_vector(eval_features[pair.a], moved[pair.b], suite));
            shifted.labels.push_back(label_sign(pair.label));
        }
        out.shifted_accuracy = evaluate(model.verifier, shifted).balanced_accuracy;
    }
    return out;
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    run(1, "region and dimension counts", 1.0, region_counts);
    run(2, "metric oracle equivalence", 10.0, metric_oracles);
    run(3, "integral pooling equals naive averaging", 10.0, pooling_equivalence);
    run(4, "EM monotone, posteriors normalised", 30.0, em_monotonicity);
    run(5, "boosting guarantees", 5.0, boosting_guarantees);

    EndToEnd full, baseline;
    run(6, "end-to-end desk-scale verification", 900.0, [&] {
        const auto prepared = prepare(1);
        full = end_to_end(prepared, default_metric_suite(), true);
        baseline = end_to_end(prepared, {Metric::modified_hausdorff}, false);
        const bool ok = full.eval_accuracy >= 90.0 && full.eval_accuracy > baseline.eval_accuracy;
        return Outcome{ok, fmt("eval balanced accuracy %.2f%% (dev %.2f%%), MHD-only baseline %.2f%%",
                               full.eval_accuracy, full.dev_accuracy, baseline.eval_accuracy)};
    });
    run(7, "determinism", 900.0, [&] {
        const auto again = end_to_end(prepare(1), default_metric_suite(), false);
        const bool same = again.model_text == full.model_text && again.eval_accuracy == full.eval_accuracy;
        return Outcome{same && !full.model_text.empty(),
                       std::string("model bytes ") + (again.model_text == full.model_text ? "identical" : "differ") +
                           fmt(", accuracy %.2f%% vs %.2f%%", again.eval_accuracy, full.eval_accuracy)};
    });
    run(8, "robustness to +/-2 px translation", 1.0, [&] {
        const double drop = full.eval_accuracy - full.shifted_accuracy;
        return Outcome{!full.model_text.empty() && drop < 10.0,
                       fmt("shifted %.2f%% vs %.2f%%, drop %.2f pp", full.shifted_accuracy, full.eval_accuracy,
                           drop)};
    });

    std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "PASSED", failures);
    return failures ? 1 : 0;
}
