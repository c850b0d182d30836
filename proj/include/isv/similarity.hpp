#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "isv/dataio.hpp"
#include "isv/dictionary.hpp"
#include "isv/metrics.hpp"
#include "isv/regions.hpp"
#include "isv/texture.hpp"

namespace isv {

struct FeatureParams {
    TextureOptions texture;
    bool average_compound = false;
    double rank_tol = 1e-10;
};

/// Local modes of one image set, in RegionLayout order, with their subspace
/// bases precomputed. A missing basis marks an all-zero mode.
struct SetFeatures {
    std::uint64_t layout_fingerprint = 0;
    int image_count = 0;
    std::vector<LocalMode> modes;
    std::vector<std::optional<Subspace>> subspaces;
};

/// Region descriptors of one image as a G x nu matrix (column j = region j).
Eigen::MatrixXd image_region_descriptors(const GrayImage& image, const VisualDictionary& dictionary,
                                         const RegionLayout& layout, const FeatureParams& params);

SetFeatures extract_set_features(const ImageSet& set, const VisualDictionary& dictionary,
                                 const RegionLayout& layout, const FeatureParams& params);

/// Feature index <-> (mode, metric) mapping: index = mode * k + metric.
struct FeatureIndex {
    std::size_t mode = 0;
    std::size_t metric = 0;
};
inline std::size_t encode_feature(FeatureIndex f, std::size_t k) { return f.mode * k + f.metric; }
inline FeatureIndex decode_feature(std::size_t index, std::size_t k) { return {index / k, index % k}; }

/// The k * nu stacked metric values, mode-major then metric-minor.
std::vector<double> similarity_vector(const SetFeatures& a, const SetFeatures& b, const MetricSuite& suite);

/// Row-per-pair similarity matrix persisted as raw little-endian float64
/// (`<path>`) with a JSON sidecar (`<path>.json`) recording shape, layout
/// fingerprint and metric order.
struct SimilarityCache {
    std::uint64_t layout_fingerprint = 0;
    MetricSuite suite;
    std::size_t dimension = 0;
    std::vector<std::vector<double>> rows;
};
void save_similarity_cache(const SimilarityCache& cache, const std::filesystem::path& path);
SimilarityCache load_similarity_cache(const std::filesystem::path& path);

}  // namespace isv
