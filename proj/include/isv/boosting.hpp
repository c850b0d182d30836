#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isv/regions.hpp"

namespace isv {

/// Decision stump on one similarity feature. Outputs +1 (matched) when
/// polarity * value < polarity * threshold, else -1. Thresholds may be
/// +/-infinity, giving a constant output.
struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    int polarity = 1;
    double alpha = 0.0;

    int predict(double value) const {
        return polarity * value < polarity * threshold ? 1 : -1;
    }
};

struct StumpFit {
    Stump stump;
    double error = 0.0;  ///< weighted 0/1 error
};

/// Exhaustive search over midpoint thresholds (plus the two infinite
/// sentinels) and both polarities. Ties prefer the smaller threshold, then
/// polarity +1. Labels are +1 / -1; weights positive.
StumpFit train_stump(std::span<const double> values, std::span<const int> labels,
                     std::span<const double> weights);

struct Decision {
    bool matched = false;
    double score = 0.0;
};

class VerificationModel {
public:
    std::vector<Stump> stumps;
    double tau = 0.0;
    std::size_t feature_dimension = 0;
    std::uint64_t layout_fingerprint = 0;
    std::string metric_suite;

    /// sum_t alpha_t * h_t(x); reads only the selected features.
    double score(std::span<const double> similarity) const;
    Decision classify(std::span<const double> similarity) const;
    std::size_t unique_features() const;
};

struct BoostingOptions {
    int rounds = 150;
    double epsilon_floor = 1e-10;
    unsigned workers = 1;
};

struct BoostingRound {
    std::size_t feature = 0;
    double error = 0.0;          ///< weighted error of the selected stump, before flooring
    double alpha = 0.0;
    double weight_sum = 0.0;     ///< after the update
    double min_weight = 0.0;     ///< after the update
    double training_error = 0.0; ///< ensemble error rate at tau = 0
    double loss_bound = 1.0;     ///< prod_t 2 sqrt(eps_t (1 - eps_t))
};

struct BoostingResult {
    VerificationModel model;
    std::vector<BoostingRound> rounds;
    bool stopped_early = false;
};

/// Discrete AdaBoost over single-feature stumps. `vectors` is row-per-sample.
BoostingResult train_adaboost(const std::vector<std::vector<double>>& vectors, std::span<const int> labels,
                              const BoostingOptions& options);

/// Threshold maximizing the mean of per-class accuracies (matched iff score >= tau).
/// Candidates are midpoints between consecutive distinct scores, 0, and one
/// point beyond each end. Ties prefer midpoints (nearest to 0), then 0.
double tune_threshold(std::span<const double> scores, std::span<const int> labels);

/// Mean of the matched-class and mismatched-class accuracies.
double balanced_accuracy(std::span<const int> predicted, std::span<const int> labels);

struct WeightMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-pixel sum of alpha over selected regions covering the pixel. A
/// compound region covers the union of its cells.
WeightMap cumulative_weight_map(const VerificationModel& model, const RegionLayout& layout,
                                std::size_t metrics_per_mode, int width, int height);

/// Writes the map as a PGM scaled so the maximum maps to 255, plus the raw
/// values as little-endian float32 next to it (extension .f32).
void save_weight_map(const WeightMap& map, const std::filesystem::path& pgm_path);

}  // namespace isv
