#include "isv/pipeline.hpp"

#include <map>
#include <numeric>
#include <random>

#include "isv/error.hpp"
#include "isv/parallel.hpp"

namespace fs = std::filesystem;

namespace isv {

PairCollection load_pair_collection(const std::vector<PairSpec>& specs) {
    PairCollection out;
    std::map<fs::path, std::size_t> index;
    auto intern = [&](const fs::path& dir) {
        std::error_code ec;
        auto key = fs::weakly_canonical(dir, ec);
        if (ec) key = dir.lexically_normal();
        const auto [it, inserted] = index.emplace(key, out.sets.size());
        if (inserted) out.sets.push_back(load_image_set(dir));
        return it->second;
    };
    for (const auto& spec : specs) {
        const auto a = intern(spec.set_a);
        const auto b = intern(spec.set_b);
        out.pairs.push_back({a, b, spec.label});
    }
    return out;
}

Eigen::MatrixXd pool_descriptors(std::span<const ImageSet> sets, const PipelineConfig& config) {
    const auto options = config.features().texture;
    std::vector<TextureDescriptor> all;
    for (const auto& set : sets)
        for (const auto& image : set.images) {
            if (image.width != config.image_width || image.height != config.image_height)
                throw Error("training image in '" + set.id + "' has the wrong size");
            auto d = extract_texture(image, options);
            all.insert(all.end(), std::make_move_iterator(d.begin()), std::make_move_iterator(d.end()));
        }
    if (all.empty()) throw Error("no training descriptors");

    std::vector<std::size_t> rows(all.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (config.max_dictionary_samples > 0 && rows.size() > config.max_dictionary_samples) {
        std::mt19937_64 rng(config.dictionary_seed ^ 0x5eedULL);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(config.max_dictionary_samples);
        std::sort(rows.begin(), rows.end());
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), config.descriptor_dim);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int d = 0; d < config.descriptor_dim; ++d)
            out(static_cast<Eigen::Index>(r), d) = all[rows[r]].coeffs[d];
    return out;
}

DictionaryTrainingResult train_dictionary(std::span<const ImageSet> sets, const PipelineConfig& config) {
    config.validate();
    return train_dictionary(pool_descriptors(sets, config), config.dictionary_options());
}

FeatureExtractor::FeatureExtractor(PipelineConfig config, VisualDictionary dictionary)
    : config_(std::move(config)), dictionary_(std::move(dictionary)) {
    config_.validate();
    if (dictionary_.dim() != config_.descriptor_dim)
        throw Error("dictionary dimension " + std::to_string(dictionary_.dim()) +
                    " does not match descriptor_dim " + std::to_string(config_.descriptor_dim));
    layout_ = RegionLayout(config_.layout());
}

SetFeatures FeatureExtractor::extract(const ImageSet& set) const {
    return extract_set_features(set, dictionary_, layout_, config_.features());
}

std::vector<SetFeatures> FeatureExtractor::extract_all(std::span<const ImageSet> sets, unsigned workers) const {
    std::vector<SetFeatures> out(sets.size());
    parallel_for(sets.size(), workers, [&](std::size_t i) {
        try {
            out[i] = extract(sets[i]);
        } catch (const Error& e) {
            throw Error("image set '" + sets[i].id + "': " + e.what());
        }
    });
    return out;
}

LabeledVectors pair_vectors(std::span<const SetFeatures> features, std::span<const IndexedPair> pairs,
                            const MetricSuite& suite, unsigned workers) {
    LabeledVectors out;
    out.vectors.resize(pairs.size());
    out.labels.resize(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        const auto& p = pairs[i];
        if (p.a >= features.size() || p.b >= features.size()) throw Error("pair refers to a missing set");
        out.vectors[i] = similarity_vector(features[p.a], features[p.b], suite);
        out.labels[i] = label_sign(p.label);
    });
    return out;
}

EvaluationReport evaluate(const VerificationModel& model, const LabeledVectors& data) {
    EvaluationReport r;
    std::size_t matched_ok = 0, mismatched_ok = 0;
    for (std::size_t i = 0; i < data.vectors.size(); ++i) {
        const auto d = model.classify(data.vectors[i]);
        r.scores.push_back(d.score);
        r.labels.push_back(data.labels[i]);
        r.predicted.push_back(d.matched ? 1 : -1);
        if (data.labels[i] > 0) {
            ++r.matched;
            matched_ok += d.matched;
        } else {
            ++r.mismatched;
            mismatched_ok += !d.matched;
        }
    }
    if (r.matched == 0 || r.mismatched == 0) throw Error("evaluation needs both matched and mismatched pairs");
    r.matched_accuracy = 100.0 * static_cast<double>(matched_ok) / static_cast<double>(r.matched);
    r.mismatched_accuracy = 100.0 * static_cast<double>(mismatched_ok) / static_cast<double>(r.mismatched);
    r.balanced_accuracy = 0.5 * (r.matched_accuracy + r.mismatched_accuracy);
    return r;
}

ModelFile train_model(const FeatureExtractor& extractor, const LabeledVectors& train, const LabeledVectors& dev,
                      unsigned workers) {
    const auto& config = extractor.config();
    auto boosted = train_adaboost(train.vectors, train.labels, config.boosting(workers));

    ModelFile model;
    model.config = config;
    model.dictionary = extractor.dictionary();
    model.layout_fingerprint = extractor.layout().fingerprint();
    model.verifier = std::move(boosted.model);
    model.verifier.layout_fingerprint = model.layout_fingerprint;
    model.verifier.metric_suite = suite_id(config.metrics);

    std::vector<double> scores;
    scores.reserve(dev.vectors.size());
    for (const auto& v : dev.vectors) scores.push_back(model.verifier.score(v));
    model.verifier.tau = tune_threshold(scores, dev.labels);
    return model;
}

}  // namespace isv
