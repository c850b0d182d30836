#pragma once

#include <filesystem>
#include <string>

#include "isv/boosting.hpp"
#include "isv/config.hpp"
#include "isv/dictionary.hpp"

namespace isv {

inline constexpr int kModelFormatVersion = 1;

/// Everything verification needs: the pipeline parameters, the visual
/// dictionary and the boosted classifier.
struct ModelFile {
    PipelineConfig config;
    VisualDictionary dictionary;
    std::uint64_t layout_fingerprint = 0;
    VerificationModel verifier;
};

/// A trained dictionary together with the config it was trained under.
struct DictionaryFile {
    PipelineConfig config;
    VisualDictionary dictionary;
};

// JSON containers. Every floating-point array is stored as the concatenated
// 16-digit hex of each value's IEEE-754 binary64 bit pattern, so loading is
// bit-exact.
std::string serialize_model(const ModelFile& model);
ModelFile parse_model(const std::string& text);
void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

std::string serialize_dictionary(const DictionaryFile& dict);
DictionaryFile parse_dictionary(const std::string& text);
void save_dictionary(const DictionaryFile& dict, const std::filesystem::path& path);
DictionaryFile load_dictionary(const std::filesystem::path& path);

std::string encode_doubles(const double* data, std::size_t count);
std::vector<double> decode_doubles(const std::string& hex);

}  // namespace isv
