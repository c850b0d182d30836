#include "isv/boosting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "isv/dataio.hpp"
#include "isv/error.hpp"
#include "isv/parallel.hpp"

namespace isv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Best stump for one feature given sample indices sorted by value.
StumpFit sweep_sorted(std::span<const double> values, std::span<const int> labels,
                      std::span<const double> weights, std::span<const std::size_t> order) {
    double pos_total = 0.0, neg_total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos_total : neg_total) += weights[i];

    StumpFit best;
    best.error = kInf;
    auto consider = [&](double threshold, double pos_left, double neg_left) {
        // polarity +1: left -> +1, right -> -1
        const double err_pos = neg_left + (pos_total - pos_left);
        // polarity -1: left -> -1, right -> +1
        const double err_neg = pos_left + (neg_total - neg_left);
        if (err_pos < best.error) best = {{0, threshold, 1, 0.0}, err_pos};
        if (err_neg < best.error) best = {{0, threshold, -1, 0.0}, err_neg};
    };

    double pos_left = 0.0, neg_left = 0.0;
    consider(-kInf, 0.0, 0.0);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t i = order[r];
        (labels[i] > 0 ? pos_left : neg_left) += weights[i];
        if (r + 1 < order.size()) {
            const double a = values[i];
            const double b = values[order[r + 1]];
            if (b > a) {
                double mid = a + (b - a) / 2;
                if (!(mid > a)) mid = b;
                consider(mid, pos_left, neg_left);
            }
        }
    }
    consider(kInf, pos_total, neg_total);
    return best;
}

void check_labels(std::span<const int> labels) {
    for (int y : labels)
        if (y != 1 && y != -1) throw Error("labels must be +1 (matched) or -1 (mismatched)");
}

std::vector<std::size_t> sorted_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return values[l] < values[r]; });
    return order;
}

}  // namespace

StumpFit train_stump(std::span<const double> values, std::span<const int> labels,
                     std::span<const double> weights) {
    if (values.empty()) throw Error("stump training needs at least one sample");
    if (values.size() != labels.size() || values.size() != weights.size())
        throw Error("stump inputs have mismatched lengths");
    check_labels(labels);
    for (double v : values)
        if (!std::isfinite(v)) throw Error("stump feature values must be finite");
    for (double w : weights)
        if (!(w > 0)) throw Error("sample weights must be positive");
    const auto order = sorted_order(values);
    return sweep_sorted(values, labels, weights, order);
}

double VerificationModel::score(std::span<const double> similarity) const {
    if (similarity.size() != feature_dimension)
        throw Error("similarity vector has " + std::to_string(similarity.size()) + " features, model expects " +
                    std::to_string(feature_dimension));
    double s = 0.0;
    for (const auto& stump : stumps) s += stump.alpha * stump.predict(similarity[stump.feature]);
    return s;
}

Decision VerificationModel::classify(std::span<const double> similarity) const {
    const double s = score(similarity);
    return {s >= tau, s};
}

std::size_t VerificationModel::unique_features() const {
    std::set<std::size_t> seen;
    for (const auto& s : stumps) seen.insert(s.feature);
    return seen.size();
}

BoostingResult train_adaboost(const std::vector<std::vector<double>>& vectors, std::span<const int> labels,
                              const BoostingOptions& options) {
    const std::size_t n = vectors.size();
    if (n == 0) throw Error("empty training set");
    if (labels.size() != n) throw Error("label count does not match sample count");
    if (options.rounds < 1) throw Error("boosting needs at least one round");
    check_labels(labels);
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    if (!has_pos || !has_neg) throw Error("training set contains a single class");
    const std::size_t dim = vectors.front().size();
    if (dim == 0) throw Error("similarity vectors are empty");
    for (const auto& v : vectors) {
        if (v.size() != dim) throw Error("similarity vectors differ in length");
        for (double x : v)
            if (!std::isfinite(x)) throw Error("similarity vectors contain non-finite values");
    }

    // Column-major copy plus per-feature sort order, computed once.
    std::vector<std::vector<double>> columns(dim, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) columns[d][i] = vectors[i][d];
    std::vector<std::vector<std::size_t>> orders(dim);
    parallel_for(dim, options.workers, [&](std::size_t d) { orders[d] = sorted_order(columns[d]); });

    BoostingResult result;
    result.model.feature_dimension = dim;
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    std::vector<double> scores(n, 0.0);
    std::vector<StumpFit> fits(dim);
    double bound = 1.0;

    for (int t = 0; t < options.rounds; ++t) {
        parallel_for(dim, options.workers, [&](std::size_t d) {
            fits[d] = sweep_sorted(columns[d], labels, weights, orders[d]);
            fits[d].stump.feature = d;
        });
        std::size_t best = 0;
        for (std::size_t d = 1; d < dim; ++d)
            if (fits[d].error < fits[best].error) best = d;
        const double raw_error = fits[best].error;
        if (raw_error >= 0.5) {
            result.stopped_early = true;
            break;
        }
        const double eps = std::max(raw_error, options.epsilon_floor);
        Stump stump = fits[best].stump;
        stump.alpha = 0.5 * std::log((1.0 - eps) / eps);

        double total = 0.0;
        const auto& column = columns[stump.feature];
        for (std::size_t i = 0; i < n; ++i) {
            const int h = stump.predict(column[i]);
            weights[i] *= std::exp(-stump.alpha * labels[i] * h);
            scores[i] += stump.alpha * h;
            total += weights[i];
        }
        for (double& w : weights) w /= total;

        BoostingRound round;
        round.feature = stump.feature;
        round.error = raw_error;
        round.alpha = stump.alpha;
        round.weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
        round.min_weight = *std::min_element(weights.begin(), weights.end());
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < n; ++i) wrong += (scores[i] >= 0 ? 1 : -1) != labels[i];
        round.training_error = static_cast<double>(wrong) / static_cast<double>(n);
        bound *= 2.0 * std::sqrt(eps * (1.0 - eps));
        round.loss_bound = bound;

        result.model.stumps.push_back(stump);
        result.rounds.push_back(round);
    }
    if (result.model.stumps.empty()) throw Error("no weak learner beat chance on the training set");
    return result;
}

double balanced_accuracy(std::span<const int> predicted, std::span<const int> labels) {
    if (predicted.size() != labels.size()) throw Error("prediction and label counts differ");
    std::size_t pos = 0, neg = 0, pos_ok = 0, neg_ok = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 0) {
            ++pos;
            pos_ok += predicted[i] > 0;
        } else {
            ++neg;
            neg_ok += predicted[i] <= 0;
        }
    }
    if (pos == 0 || neg == 0) throw Error("balanced accuracy needs both classes");
    return 0.5 * (static_cast<double>(pos_ok) / pos + static_cast<double>(neg_ok) / neg);
}

double tune_threshold(std::span<const double> scores, std::span<const int> labels) {
    if (scores.empty()) throw Error("threshold tuning needs a nonempty development set");
    if (scores.size() != labels.size()) throw Error("score and label counts differ");
    check_labels(labels);
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    if (!has_pos || !has_neg) throw Error("development set contains a single class");

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<int> predicted(scores.size());
    auto evaluate = [&](double tau) {
        for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] >= tau ? 1 : -1;
        return balanced_accuracy(predicted, labels);
    };

    // Priority: 0 for midpoints, 1 for zero, 2 for the outer sentinels.
    double best_tau = 0.0, best_acc = -1.0;
    int best_rank = 3;
    auto consider = [&](double tau, int rank) {
        const double acc = evaluate(tau);
        const bool better = acc > best_acc ||
                            (acc == best_acc && (rank < best_rank ||
                                                 (rank == best_rank && std::abs(tau) < std::abs(best_tau))));
        if (better) {
            best_acc = acc;
            best_tau = tau;
            best_rank = rank;
        }
    };
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        double mid = sorted[i] + (sorted[i + 1] - sorted[i]) / 2;
        if (!(mid > sorted[i])) mid = sorted[i + 1];
        consider(mid, 0);
    }
    consider(0.0, 1);
    consider(sorted.front() - 1.0, 2);
    consider(sorted.back() + 1.0, 2);
    return best_tau;
}

WeightMap cumulative_weight_map(const VerificationModel& model, const RegionLayout& layout,
                                std::size_t metrics_per_mode, int width, int height) {
    if (model.stumps.empty()) throw Error("model has no selected features");
    if (metrics_per_mode == 0) throw Error("metrics per mode must be positive");
    if (width <= 0 || height <= 0) throw Error("weight map dimensions must be positive");
    WeightMap map{width, height, std::vector<double>(static_cast<std::size_t>(width) * height, 0.0)};
    std::vector<char> covered(map.values.size());
    for (const auto& stump : model.stumps) {
        const std::size_t mode = stump.feature / metrics_per_mode;
        if (mode >= layout.size())
            throw Error("feature " + std::to_string(stump.feature) + " lies outside the region layout");
        std::fill(covered.begin(), covered.end(), 0);
        for (const auto& cell : layout.cells_of(mode))
            for (int y = std::max(0, cell.y); y < std::min(height, cell.y + cell.size); ++y)
                for (int x = std::max(0, cell.x); x < std::min(width, cell.x + cell.size); ++x)
                    covered[static_cast<std::size_t>(y) * width + x] = 1;
        for (std::size_t i = 0; i < covered.size(); ++i)
            if (covered[i]) map.values[i] += stump.alpha;
    }
    return map;
}

void save_weight_map(const WeightMap& map, const std::filesystem::path& pgm_path) {
    const double peak = map.values.empty() ? 0.0 : *std::max_element(map.values.begin(), map.values.end());
    GrayImage image(map.width, map.height);
    for (std::size_t i = 0; i < map.values.size(); ++i)
        image.pixels[i] = peak > 0 ? map.values[i] / peak : 0.0;
    save_pgm(image, pgm_path);

    auto raw_path = pgm_path;
    raw_path.replace_extension(".f32");
    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) throw Error("cannot write " + raw_path.string());
    for (double v : map.values) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        unsigned char bytes[4];
        for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
        raw.write(reinterpret_cast<const char*>(bytes), 4);
    }
    if (!raw) throw Error("failed writing " + raw_path.string());
}

}  // namespace isv
