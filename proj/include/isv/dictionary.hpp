#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace isv {

/// Posterior probabilities over the dictionary's components; sums to 1.
using ProbHistogram = Eigen::VectorXd;

/// Gaussian mixture with diagonal covariances. Component g has weight
/// weights()(g), mean means().row(g) and per-dimension variances
/// variances().row(g). Immutable once built.
class VisualDictionary {
public:
    VisualDictionary() = default;
    VisualDictionary(Eigen::VectorXd weights, Eigen::MatrixXd means, Eigen::MatrixXd variances);

    int components() const { return static_cast<int>(weights_.size()); }
    int dim() const { return static_cast<int>(means_.cols()); }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::MatrixXd& means() const { return means_; }
    const Eigen::MatrixXd& variances() const { return variances_; }

    /// log(w_g p_g(x)) for every component.
    Eigen::VectorXd log_joint(std::span<const double> x) const;

    /// w_g p_g(x) / sum_j w_j p_j(x), evaluated with log-sum-exp.
    ProbHistogram posterior(std::span<const double> x) const;

    /// Row i of the result is the posterior of row i of `samples` (N x dim).
    Eigen::MatrixXd posteriors(const Eigen::MatrixXd& samples) const;

    /// Mean per-sample log-likelihood.
    double log_likelihood(const Eigen::MatrixXd& samples) const;

private:
    void precompute();

    Eigen::VectorXd weights_;
    Eigen::MatrixXd means_;
    Eigen::MatrixXd variances_;
    Eigen::MatrixXd inv_variances_;
    Eigen::VectorXd log_norm_;  // log w_g - 0.5 * sum_d log(2 pi var_gd)
};

struct DictionaryTrainingOptions {
    int components = 1024;
    int max_iters = 100;
    /// Stop once the per-sample log-likelihood improves by less than this.
    double tol = 1e-6;
    std::uint64_t seed = 1;
    double variance_floor = 1e-4;
    int kmeans_iters = 10;
};

struct DictionaryTrainingResult {
    VisualDictionary dictionary;
    /// Per-sample log-likelihood of the initial model and after every M-step.
    std::vector<double> log_likelihood;
    int iterations = 0;
    bool converged = false;
};

/// EM over `samples` (N x dim), initialised by seeded k-means.
DictionaryTrainingResult train_dictionary(const Eigen::MatrixXd& samples,
                                          const DictionaryTrainingOptions& options);

}  // namespace isv
