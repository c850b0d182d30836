#include "isv/model_file.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "isv/error.hpp"
#include "isv/regions.hpp"

namespace isv {

using nlohmann::json;

std::string encode_doubles(const double* data, std::size_t count) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(count * 16, '0');
    for (std::size_t i = 0; i < count; ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(data[i]);
        for (int d = 0; d < 16; ++d) out[i * 16 + d] = digits[(bits >> (60 - 4 * d)) & 0xf];
    }
    return out;
}

std::vector<double> decode_doubles(const std::string& hex) {
    if (hex.size() % 16 != 0) throw Error("hex array length is not a multiple of 16");
    std::vector<double> out(hex.size() / 16);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int d = 0; d < 16; ++d) {
            const char c = hex[i * 16 + d];
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
            else throw Error("invalid hex digit in numeric array");
            bits = (bits << 4) | static_cast<std::uint64_t>(v);
        }
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

namespace {

constexpr const char* kEncoding = "ieee754-binary64-hex";

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string encode(double v) { return encode_doubles(&v, 1); }

double decode_one(const json& j) {
    const auto v = decode_doubles(j.get<std::string>());
    if (v.size() != 1) throw Error("expected a single encoded value");
    return v.front();
}

json dictionary_json(const VisualDictionary& d) {
    // Row-major so the hex layout does not depend on Eigen's storage order.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> means = d.means();
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> vars = d.variances();
    return {
        {"components", d.components()},
        {"dim", d.dim()},
        {"weights", encode_doubles(d.weights().data(), static_cast<std::size_t>(d.weights().size()))},
        {"means", encode_doubles(means.data(), static_cast<std::size_t>(means.size()))},
        {"variances", encode_doubles(vars.data(), static_cast<std::size_t>(vars.size()))},
    };
}

VisualDictionary dictionary_from_json(const json& j) {
    const int g = j.at("components").get<int>();
    const int dim = j.at("dim").get<int>();
    const auto w = decode_doubles(j.at("weights").get<std::string>());
    const auto m = decode_doubles(j.at("means").get<std::string>());
    const auto v = decode_doubles(j.at("variances").get<std::string>());
    const auto cells = static_cast<std::size_t>(g) * dim;
    if (g < 1 || dim < 1 || w.size() != static_cast<std::size_t>(g) || m.size() != cells || v.size() != cells)
        throw Error("dictionary arrays do not match the declared shape");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return VisualDictionary(Eigen::Map<const Eigen::VectorXd>(w.data(), g),
                            Eigen::Map<const RowMajor>(m.data(), g, dim),
                            Eigen::Map<const RowMajor>(v.data(), g, dim));
}

json header(const char* format) {
    return {{"format", format}, {"version", kModelFormatVersion}, {"float_encoding", kEncoding}};
}

json parse_checked(const std::string& text, const char* format) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed ") + format + " file: " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != format)
        throw Error(std::string("not an ") + format + " file");
    if (j.value("version", -1) != kModelFormatVersion)
        throw Error(std::string(format) + " version " + std::to_string(j.value("version", -1)) +
                    " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    if (j.value("float_encoding", "") != kEncoding) throw Error("unsupported float encoding");
    return j;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
    const auto& v = model.verifier;
    std::vector<std::size_t> features;
    std::vector<int> polarity;
    std::vector<double> thresholds, alphas;
    for (const auto& s : v.stumps) {
        features.push_back(s.feature);
        polarity.push_back(s.polarity);
        thresholds.push_back(s.threshold);
        alphas.push_back(s.alpha);
    }
    json j = header("isv-model");
    j["config"] = to_json(model.config);
    j["dictionary"] = dictionary_json(model.dictionary);
    j["layout_fingerprint"] = hex64(model.layout_fingerprint);
    j["verifier"] = {
        {"feature_dimension", v.feature_dimension},
        {"metric_suite", v.metric_suite},
        {"layout_fingerprint", hex64(v.layout_fingerprint)},
        {"tau", encode(v.tau)},
        {"stumps",
         {{"count", v.stumps.size()},
          {"feature", features},
          {"polarity", polarity},
          {"threshold", encode_doubles(thresholds.data(), thresholds.size())},
          {"alpha", encode_doubles(alphas.data(), alphas.size())}}},
    };
    return j.dump(1) + "\n";
}

ModelFile parse_model(const std::string& text) {
    const json j = parse_checked(text, "isv-model");
    try {
        ModelFile m;
        m.config = config_from_json(j.at("config"));
        m.config.validate();
        m.dictionary = dictionary_from_json(j.at("dictionary"));
        m.layout_fingerprint = std::stoull(j.at("layout_fingerprint").get<std::string>(), nullptr, 16);

        const auto& v = j.at("verifier");
        m.verifier.feature_dimension = v.at("feature_dimension").get<std::size_t>();
        m.verifier.metric_suite = v.at("metric_suite").get<std::string>();
        m.verifier.layout_fingerprint = std::stoull(v.at("layout_fingerprint").get<std::string>(), nullptr, 16);
        m.verifier.tau = decode_one(v.at("tau"));
        const auto& s = v.at("stumps");
        const auto count = s.at("count").get<std::size_t>();
        const auto features = s.at("feature").get<std::vector<std::size_t>>();
        const auto polarity = s.at("polarity").get<std::vector<int>>();
        const auto thresholds = decode_doubles(s.at("threshold").get<std::string>());
        const auto alphas = decode_doubles(s.at("alpha").get<std::string>());
        if (features.size() != count || polarity.size() != count || thresholds.size() != count ||
            alphas.size() != count)
            throw Error("stump arrays disagree in length");
        for (std::size_t i = 0; i < count; ++i) {
            if (features[i] >= m.verifier.feature_dimension) throw Error("stump feature index out of range");
            if (polarity[i] != 1 && polarity[i] != -1) throw Error("stump polarity must be +1 or -1");
            m.verifier.stumps.push_back({features[i], thresholds[i], polarity[i], alphas[i]});
        }
        if (m.layout_fingerprint != RegionLayout(m.config.layout()).fingerprint())
            throw Error("layout fingerprint does not match the embedded config");
        return m;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
    write_file(path, serialize_model(model));
}

ModelFile load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

std::string serialize_dictionary(const DictionaryFile& dict) {
    json j = header("isv-dictionary");
    j["config"] = to_json(dict.config);
    j["dictionary"] = dictionary_json(dict.dictionary);
    return j.dump(1) + "\n";
}

DictionaryFile parse_dictionary(const std::string& text) {
    const json j = parse_checked(text, "isv-dictionary");
    try {
        DictionaryFile d;
        d.config = config_from_json(j.at("config"));
        d.dictionary = dictionary_from_json(j.at("dictionary"));
        return d;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed dictionary file: ") + e.what());
    }
}

void save_dictionary(const DictionaryFile& dict, const std::filesystem::path& path) {
    write_file(path, serialize_dictionary(dict));
}

DictionaryFile load_dictionary(const std::filesystem::path& path) { return parse_dictionary(read_file(path)); }

}  // namespace isv
