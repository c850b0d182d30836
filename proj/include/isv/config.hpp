#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "isv/boosting.hpp"
#include "isv/dictionary.hpp"
#include "isv/metrics.hpp"
#include "isv/regions.hpp"
#include "isv/similarity.hpp"

namespace isv {

/// Every parameter that influences a trained model. Embedded in each model
/// file so a verification run can rebuild the exact feature pipeline.
struct PipelineConfig {
    int image_width = 64;
    int image_height = 64;

    int block_size = 8;
    int block_step = 4;
    int descriptor_dim = 15;
    bool normalize_descriptor = false;

    int components = 1024;
    int em_max_iters = 100;
    double em_tol = 1e-6;
    int kmeans_iters = 10;
    double variance_floor = 1e-4;
    std::uint64_t dictionary_seed = 1;
    /// Random subset of pooled descriptors used for EM; 0 keeps all.
    std::size_t max_dictionary_samples = 0;

    int region_size = 24;
    int region_stride = 1;
    std::vector<int> compound_offsets{4, 8, 12};
    bool average_compound = false;

    MetricSuite metrics = default_metric_suite();
    double rank_tol = 1e-10;

    int rounds = 150;
    double epsilon_floor = 1e-10;

    /// Full-size parameterisation: G = 1024, region stride 1, Q = 150.
    static PipelineConfig full();
    /// Laptop-scale parameterisation: G = 64, region stride 4, Q = 50.
    static PipelineConfig desk();

    void validate() const;

    LayoutParams layout() const;
    FeatureParams features() const;
    DictionaryTrainingOptions dictionary_options() const;
    BoostingOptions boosting(unsigned workers = 1) const;
};

nlohmann::json to_json(const PipelineConfig& config);

/// Overrides fields of `base` with those present in `j`; unknown keys are errors.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

}  // namespace isv
