#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "isv/dataio.hpp"

namespace isv {

/// Parameters of the synthetic identity generator. Each identity owns a
/// smoothed random texture and a few smooth variation fields of its own
/// (think expression or pose). A set perturbs the texture; every image adds
/// its own mix of the identity's variation fields and is then a jittered,
/// relit and noisy view of the result.
struct SynthParams {
    int image_size = 64;
    int train_identities = 20;
    int dev_identities = 30;
    int eval_identities = 30;
    int sets_per_identity = 5;
    int images_per_set = 3;
    /// Matched (and mismatched) pairs per split; 0 takes the largest balanced count.
    int pairs_per_class = 150;
    std::uint64_t seed = 1;

    double contrast = 0.12;         ///< std-dev of the identity texture
    double smoothing = 1.5;         ///< Gaussian sigma of the fine texture scale (pixels)
    double coarse_smoothing = 4.0;  ///< Gaussian sigma of the coarse texture scale
    double set_variation = 0.3;     ///< relative weight of per-set texture change
    int identity_modes = 2;         ///< variation fields per identity
    double mode_strength = 0.3;     ///< std-dev of each image's coefficient on a variation field
    int max_translation = 3;        ///< per-image shift, pixels, each axis
    double illumination_offset = 0.1;
    double illumination_gradient = 0.002;  ///< per-pixel slope bound
    double noise = 0.02;
};

struct SynthSplit {
    std::string name;
    /// sets[i] belongs to identity identity_of[i].
    std::vector<ImageSet> sets;
    std::vector<int> identity_of;
    std::vector<IndexedPair> pairs;

    LabelCounts counts() const;
};

struct SynthDataset {
    SynthSplit train;
    SynthSplit dev;
    SynthSplit eval;
};

/// Pure function of `params`: identical parameters give identical pixels.
/// Throws when a split cannot supply the requested balanced pair count.
SynthDataset synth_dataset(const SynthParams& params);

/// Writes `<out>/<split>/<identity>/<set>/<image>.pgm` plus
/// `<out>/{train,dev,eval}_pairs.csv`. Returns the manifest paths in that order.
std::vector<std::filesystem::path> write_synth_dataset(const SynthDataset& dataset,
                                                       const std::filesystem::path& out_dir);

/// Every split gets `n_identities` fresh identities and the largest balanced
/// pair count; all other parameters keep their defaults.
SynthDataset synth_dataset(int n_identities, int sets_per_identity, int images_per_set,
                           std::uint64_t seed);

}  // namespace isv
