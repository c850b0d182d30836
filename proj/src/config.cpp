#include "isv/config.hpp"

#include <algorithm>

#include "isv/error.hpp"

namespace isv {

PipelineConfig PipelineConfig::full() { return {}; }

PipelineConfig PipelineConfig::desk() {
    PipelineConfig c;
    c.components = 64;
    c.region_stride = 4;
    c.rounds = 50;
    c.em_max_iters = 50;
    c.max_dictionary_samples = 20000;
    return c;
}

void PipelineConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v <= 0) throw Error(std::string("config: ") + name + " must be positive");
    };
    positive(image_width, "image_width");
    positive(image_height, "image_height");
    positive(block_size, "block_size");
    positive(block_step, "block_step");
    positive(descriptor_dim, "descriptor_dim");
    positive(components, "components");
    positive(em_max_iters, "em_max_iters");
    positive(kmeans_iters, "kmeans_iters");
    positive(region_size, "region_size");
    positive(region_stride, "region_stride");
    positive(rounds, "rounds");
    if (descriptor_dim > block_size * block_size - 1)
        throw Error("config: descriptor_dim exceeds the AC coefficients of a block");
    if (!(em_tol > 0) || !(variance_floor > 0) || !(rank_tol > 0) || !(epsilon_floor > 0))
        throw Error("config: tolerances must be positive");
    if (region_size > std::min(image_width, image_height))
        throw Error("config: region_size exceeds the image");
    if (block_size > region_size) throw Error("config: block_size exceeds region_size");
    if (compound_offsets.empty()) throw Error("config: compound_offsets must not be empty");
    for (int o : compound_offsets)
        if (o <= 0) throw Error("config: compound offsets must be positive");
    if (!std::is_sorted(compound_offsets.begin(), compound_offsets.end()))
        throw Error("config: compound offsets must be sorted ascending");
    if (metrics.empty()) throw Error("config: metric suite must not be empty");
}

LayoutParams PipelineConfig::layout() const {
    return {image_width, image_height, region_size, region_stride, compound_offsets};
}

FeatureParams PipelineConfig::features() const {
    return {{block_size, block_step, descriptor_dim, normalize_descriptor}, average_compound, rank_tol};
}

DictionaryTrainingOptions PipelineConfig::dictionary_options() const {
    return {components, em_max_iters, em_tol, dictionary_seed, variance_floor, kmeans_iters};
}

BoostingOptions PipelineConfig::boosting(unsigned workers) const { return {rounds, epsilon_floor, workers}; }

nlohmann::json to_json(const PipelineConfig& c) {
    std::vector<std::string> metrics;
    for (auto m : c.metrics) metrics.emplace_back(to_string(m));
    return {
        {"image_width", c.image_width},
        {"image_height", c.image_height},
        {"block_size", c.block_size},
        {"block_step", c.block_step},
        {"descriptor_dim", c.descriptor_dim},
        {"normalize_descriptor", c.normalize_descriptor},
        {"components", c.components},
        {"em_max_iters", c.em_max_iters},
        {"em_tol", c.em_tol},
        {"kmeans_iters", c.kmeans_iters},
        {"variance_floor", c.variance_floor},
        {"dictionary_seed", c.dictionary_seed},
        {"max_dictionary_samples", c.max_dictionary_samples},
        {"region_size", c.region_size},
        {"region_stride", c.region_stride},
        {"compound_offsets", c.compound_offsets},
        {"average_compound", c.average_compound},
        {"metrics", metrics},
        {"rank_tol", c.rank_tol},
        {"rounds", c.rounds},
        {"epsilon_floor", c.epsilon_floor},
    };
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c) {
    if (!j.is_object()) throw Error("config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "image_width") c.image_width = value.get<int>();
            else if (key == "image_height") c.image_height = value.get<int>();
            else if (key == "block_size") c.block_size = value.get<int>();
            else if (key == "block_step") c.block_step = value.get<int>();
            else if (key == "descriptor_dim") c.descriptor_dim = value.get<int>();
            else if (key == "normalize_descriptor") c.normalize_descriptor = value.get<bool>();
            else if (key == "components") c.components = value.get<int>();
            else if (key == "em_max_iters") c.em_max_iters = value.get<int>();
            else if (key == "em_tol") c.em_tol = value.get<double>();
            else if (key == "kmeans_iters") c.kmeans_iters = value.get<int>();
            else if (key == "variance_floor") c.variance_floor = value.get<double>();
            else if (key == "dictionary_seed") c.dictionary_seed = value.get<std::uint64_t>();
            else if (key == "max_dictionary_samples") c.max_dictionary_samples = value.get<std::size_t>();
            else if (key == "region_size") c.region_size = value.get<int>();
            else if (key == "region_stride") c.region_stride = value.get<int>();
            else if (key == "compound_offsets") c.compound_offsets = value.get<std::vector<int>>();
            else if (key == "average_compound") c.average_compound = value.get<bool>();
            else if (key == "metrics") {
                c.metrics.clear();
                for (const auto& name : value.get<std::vector<std::string>>()) c.metrics.push_back(parse_metric(name));
            } else if (key == "rank_tol") c.rank_tol = value.get<double>();
            else if (key == "rounds") c.rounds = value.get<int>();
            else if (key == "epsilon_floor") c.epsilon_floor = value.get<double>();
            else throw Error("config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    return c;
}

}  // namespace isv
