#include "isv/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "isv/error.hpp"

namespace isv {

namespace {

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

VisualDictionary::VisualDictionary(Eigen::VectorXd weights, Eigen::MatrixXd means,
                                   Eigen::MatrixXd variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
    const auto g = weights_.size();
    if (g < 1) throw Error("dictionary needs at least one component");
    if (means_.rows() != g || variances_.rows() != g || means_.cols() != variances_.cols() ||
        means_.cols() < 1)
        throw Error("dictionary parameter shapes disagree");
    if ((weights_.array() < 0).any() || !weights_.allFinite())
        throw Error("dictionary weights must be finite and non-negative");
    if (std::abs(weights_.sum() - 1.0) > 1e-9) throw Error("dictionary weights must sum to 1");
    if (!means_.allFinite()) throw Error("dictionary means must be finite");
    if (!(variances_.array() > 0).all() || !variances_.allFinite())
        throw Error("dictionary variances must be positive");
    precompute();
}

void VisualDictionary::precompute() {
    inv_variances_ = variances_.cwiseInverse();
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    log_norm_.resize(weights_.size());
    for (Eigen::Index g = 0; g < weights_.size(); ++g) {
        const double log_det = variances_.row(g).array().log().sum();
        log_norm_(g) = std::log(weights_(g)) - 0.5 * (dim() * log_2pi + log_det);
    }
}

Eigen::VectorXd VisualDictionary::log_joint(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim())
        throw Error("descriptor has dimension " + std::to_string(x.size()) + ", dictionary expects " +
                    std::to_string(dim()));
    const Eigen::Map<const Eigen::RowVectorXd> xv(x.data(), dim());
    Eigen::VectorXd out(components());
    for (int g = 0; g < components(); ++g) {
        const double maha = ((xv - means_.row(g)).array().square() * inv_variances_.row(g).array()).sum();
        out(g) = log_norm_(g) - 0.5 * maha;
    }
    return out;
}

ProbHistogram VisualDictionary::posterior(std::span<const double> x) const {
    Eigen::VectorXd lj = log_joint(x);
    const double m = lj.maxCoeff();
    if (!std::isfinite(m)) throw Error("posterior undefined for non-finite descriptor");
    Eigen::VectorXd p = (lj.array() - m).exp();
    return p / p.sum();
}

Eigen::MatrixXd VisualDictionary::posteriors(const Eigen::MatrixXd& samples) const {
    Eigen::MatrixXd out(samples.rows(), components());
    Eigen::RowVectorXd row(samples.cols());
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        row = samples.row(i);
        out.row(i) = posterior(std::span<const double>(row.data(), row.size())).transpose();
    }
    return out;
}

double VisualDictionary::log_likelihood(const Eigen::MatrixXd& samples) const {
    if (samples.rows() == 0) throw Error("log-likelihood of an empty sample");
    double total = 0.0;
    Eigen::RowVectorXd row(samples.cols());
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        row = samples.row(i);
        total += log_sum_exp(log_joint(std::span<const double>(row.data(), row.size())));
    }
    return total / static_cast<double>(samples.rows());
}

namespace {

struct KMeansState {
    Eigen::MatrixXd centers;
    std::vector<int> assignment;
};

// Nearest centre by squared Euclidean distance; ties go to the lowest index.
int nearest(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& x) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index g = 0; g < centers.rows(); ++g) {
        const double d = (centers.row(g) - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(g);
        }
    }
    return best;
}

KMeansState kmeans(const Eigen::MatrixXd& x, int k, int iters, std::mt19937_64& rng) {
    const auto n = x.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    KMeansState s;
    s.centers.resize(k, x.cols());
    std::set<std::vector<double>> seen;
    int chosen = 0;
    for (auto idx : order) {
        std::vector<double> v(x.cols());
        for (Eigen::Index d = 0; d < x.cols(); ++d) v[d] = x(idx, d);
        if (!seen.insert(v).second) continue;
        s.centers.row(chosen++) = x.row(idx);
        if (chosen == k) break;
    }
    if (chosen < k)
        throw Error("only " + std::to_string(chosen) + " distinct descriptors for " + std::to_string(k) +
                    " components");

    s.assignment.assign(static_cast<std::size_t>(n), 0);
    for (int it = 0; it <= iters; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) s.assignment[i] = nearest(s.centers, x.row(i));
        if (it == iters) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        std::vector<long> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(s.assignment[i]) += x.row(i);
            ++counts[s.assignment[i]];
        }
        for (int g = 0; g < k; ++g)
            if (counts[g] > 0) s.centers.row(g) = sums.row(g) / static_cast<double>(counts[g]);
    }
    return s;
}

VisualDictionary initial_model(const Eigen::MatrixXd& x, const KMeansState& km, double floor) {
    const auto k = km.centers.rows();
    const auto n = x.rows();
    const Eigen::RowVectorXd global_mean = x.colwise().mean();
    const Eigen::RowVectorXd global_var = (x.rowwise() - global_mean).array().square().colwise().mean();

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const int g = km.assignment[i];
        counts(g) += 1;
        means.row(g) += x.row(i);
    }
    for (Eigen::Index g = 0; g < k; ++g)
        means.row(g) = counts(g) > 0 ? Eigen::RowVectorXd(means.row(g) / counts(g))
                                     : Eigen::RowVectorXd(km.centers.row(g));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int g = km.assignment[i];
        sq.row(g) += (x.row(i) - means.row(g)).array().square().matrix();
    }
    Eigen::MatrixXd vars(k, x.cols());
    for (Eigen::Index g = 0; g < k; ++g)
        vars.row(g) = counts(g) >= 2 ? Eigen::RowVectorXd(sq.row(g) / counts(g)) : global_var;
    vars = vars.cwiseMax(floor);

    Eigen::VectorXd weights = counts.cwiseMax(1.0);
    weights /= weights.sum();
    return VisualDictionary(weights, means, vars);
}

}  // namespace

DictionaryTrainingResult train_dictionary(const Eigen::MatrixXd& samples,
                                          const DictionaryTrainingOptions& options) {
    const int k = options.components;
    if (k < 1) throw Error("dictionary needs at least one component");
    if (samples.rows() < k)
        throw Error("fewer samples (" + std::to_string(samples.rows()) + ") than components (" +
                    std::to_string(k) + ")");
    if (samples.cols() < 1) throw Error("descriptors have zero dimension");
    if (!samples.allFinite()) throw Error("training descriptors contain non-finite values");
    if (options.variance_floor <= 0) throw Error("variance floor must be positive");

    std::mt19937_64 rng(options.seed);
    const auto km = kmeans(samples, k, options.kmeans_iters, rng);

    DictionaryTrainingResult result;
    VisualDictionary model = initial_model(samples, km, options.variance_floor);

    const auto n = samples.rows();
    const auto dim = samples.cols();
    Eigen::MatrixXd resp(n, k);
    Eigen::RowVectorXd row(dim);
    for (;;) {
        // E-step
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            row = samples.row(i);
            Eigen::VectorXd lj = model.log_joint(std::span<const double>(row.data(), dim));
            const double lse = log_sum_exp(lj);
            total += lse;
            resp.row(i) = (lj.array() - lse).exp().transpose();
        }
        const double ll = total / static_cast<double>(n);
        if (!result.log_likelihood.empty() && ll - result.log_likelihood.back() < options.tol) {
            result.log_likelihood.push_back(ll);
            result.converged = true;
            break;
        }
        result.log_likelihood.push_back(ll);
        if (result.iterations >= options.max_iters) break;

        // M-step
        const Eigen::VectorXd nk = resp.colwise().sum().transpose();
        Eigen::MatrixXd means = model.means();
        Eigen::MatrixXd vars = model.variances();
        for (int g = 0; g < k; ++g) {
            if (nk(g) <= 0) continue;
            means.row(g) = (resp.col(g).transpose() * samples) / nk(g);
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dim);
            for (Eigen::Index i = 0; i < n; ++i)
                acc += resp(i, g) * (samples.row(i) - means.row(g)).array().square().matrix();
            vars.row(g) = (acc / nk(g)).cwiseMax(options.variance_floor);
        }
        Eigen::VectorXd weights = nk / nk.sum();
        model = VisualDictionary(weights, means, vars);
        ++result.iterations;
    }
    result.dictionary = std::move(model);
    return result;
}

}  // namespace isv
