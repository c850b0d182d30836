#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "isv/config.hpp"
#include "isv/dataio.hpp"
#include "isv/model_file.hpp"
#include "isv/similarity.hpp"

namespace isv {

/// Image sets plus pairs indexing into them.
struct PairCollection {
    std::vector<ImageSet> sets;
    std::vector<IndexedPair> pairs;
};

/// Loads each distinct set directory of a manifest once.
PairCollection load_pair_collection(const std::vector<PairSpec>& specs);

/// Texture descriptors of every block of every image, one row each. With
/// `max_samples` > 0, a seeded random subset of that many rows is kept.
Eigen::MatrixXd pool_descriptors(std::span<const ImageSet> sets, const PipelineConfig& config);

DictionaryTrainingResult train_dictionary(std::span<const ImageSet> sets, const PipelineConfig& config);

/// Dictionary + layout bound to one config.
class FeatureExtractor {
public:
    FeatureExtractor(PipelineConfig config, VisualDictionary dictionary);

    const PipelineConfig& config() const { return config_; }
    const VisualDictionary& dictionary() const { return dictionary_; }
    const RegionLayout& layout() const { return layout_; }

    SetFeatures extract(const ImageSet& set) const;
    std::vector<SetFeatures> extract_all(std::span<const ImageSet> sets, unsigned workers = 1) const;

private:
    PipelineConfig config_;
    VisualDictionary dictionary_;
    RegionLayout layout_;
};

struct LabeledVectors {
    std::vector<std::vector<double>> vectors;
    std::vector<int> labels;
};

/// Similarity vector of every pair; output order follows `pairs`.
LabeledVectors pair_vectors(std::span<const SetFeatures> features, std::span<const IndexedPair> pairs,
                            const MetricSuite& suite, unsigned workers = 1);

struct EvaluationReport {
    std::size_t matched = 0;
    std::size_t mismatched = 0;
    double matched_accuracy = 0.0;     ///< percent
    double mismatched_accuracy = 0.0;  ///< percent
    double balanced_accuracy = 0.0;    ///< percent
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<int> predicted;
};

EvaluationReport evaluate(const VerificationModel& model, const LabeledVectors& data);

/// Boosts on `train`, tunes tau on `dev`, and packs everything into a model file.
ModelFile train_model(const FeatureExtractor& extractor, const LabeledVectors& train, const LabeledVectors& dev,
                      unsigned workers = 1);

}  // namespace isv
