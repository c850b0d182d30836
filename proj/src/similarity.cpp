#include "isv/similarity.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "isv/error.hpp"

namespace isv {

Eigen::MatrixXd image_region_descriptors(const GrayImage& image, const VisualDictionary& dictionary,
                                         const RegionLayout& layout, const FeatureParams& params) {
    const auto& lp = layout.params();
    if (image.width != lp.width || image.height != lp.height)
        throw Error("image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    " but the layout expects " + std::to_string(lp.width) + "x" + std::to_string(lp.height));
    const auto& to = params.texture;
    const auto grid = BlockGrid::for_image(image.width, image.height, to.block_size, to.block_step);
    const auto textures = extract_texture(image, to);

    Eigen::MatrixXd block_hist(grid.count(), dictionary.components());
    for (std::size_t i = 0; i < textures.size(); ++i)
        block_hist.row(static_cast<Eigen::Index>(i)) = dictionary.posterior(textures[i].coeffs).transpose();

    const IntegralHistogram integral(grid, block_hist);
    const auto& direct = layout.direct();
    const auto& compound = layout.compound();
    Eigen::MatrixXd out(dictionary.components(), static_cast<Eigen::Index>(layout.size()));
    for (std::size_t j = 0; j < direct.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = integral.direct_descriptor(direct[j]);
    const auto direct_cols = out.leftCols(static_cast<Eigen::Index>(direct.size()));
    const Eigen::MatrixXd direct_block = direct_cols;
    for (std::size_t c = 0; c < compound.size(); ++c)
        out.col(static_cast<Eigen::Index>(direct.size() + c)) =
            compound_descriptor(direct_block, compound[c], params.average_compound);
    return out;
}

SetFeatures extract_set_features(const ImageSet& set, const VisualDictionary& dictionary,
                                 const RegionLayout& layout, const FeatureParams& params) {
    if (set.images.empty()) throw Error("image set '" + set.id + "' is empty");
    std::vector<Eigen::MatrixXd> per_image;
    per_image.reserve(set.images.size());
    for (const auto& image : set.images)
        per_image.push_back(image_region_descriptors(image, dictionary, layout, params));

    SetFeatures f;
    f.layout_fingerprint = layout.fingerprint();
    f.image_count = static_cast<int>(set.images.size());
    const auto nu = layout.size();
    const auto l = static_cast<Eigen::Index>(set.images.size());
    f.modes.reserve(nu);
    f.subspaces.reserve(nu);
    for (std::size_t j = 0; j < nu; ++j) {
        LocalMode mode(dictionary.components(), l);
        for (Eigen::Index i = 0; i < l; ++i) mode.col(i) = per_image[i].col(static_cast<Eigen::Index>(j));
        if (mode.isZero(0.0))
            f.subspaces.emplace_back(std::nullopt);
        else
            f.subspaces.emplace_back(orthonormal_basis(mode, params.rank_tol));
        f.modes.push_back(std::move(mode));
    }
    return f;
}

std::vector<double> similarity_vector(const SetFeatures& a, const SetFeatures& b, const MetricSuite& suite) {
    if (a.layout_fingerprint != b.layout_fingerprint || a.modes.size() != b.modes.size())
        throw Error("similarity between features built with different region layouts");
    if (suite.empty()) throw Error("empty metric suite");
    bool need_angles = false;
    for (auto m : suite) need_angles |= is_subspace_metric(m);

    const std::size_t k = suite.size();
    std::vector<double> out(a.modes.size() * k);
    for (std::size_t j = 0; j < a.modes.size(); ++j) {
        try {
            std::optional<PrincipalAngles> angles;
            if (need_angles && a.subspaces[j] && b.subspaces[j])
                angles = principal_angles(*a.subspaces[j], *b.subspaces[j]);
            for (std::size_t m = 0; m < k; ++m) {
                double v = 0.0;
                switch (suite[m]) {
                    case Metric::geodesic: v = angles ? geodesic_distance(*angles) : 0.0; break;
                    case Metric::binet_cauchy: v = angles ? binet_cauchy_distance(*angles) : 0.0; break;
                    case Metric::hausdorff: v = hausdorff_distance(a.modes[j], b.modes[j]); break;
                    case Metric::modified_hausdorff:
                        v = modified_hausdorff_distance(a.modes[j], b.modes[j]);
                        break;
                }
                out[j * k + m] = v;
            }
        } catch (const Error& e) {
            throw Error("local mode " + std::to_string(j) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

void save_similarity_cache(const SimilarityCache& cache, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write similarity cache " + path.string());
    for (const auto& row : cache.rows) {
        if (row.size() != cache.dimension) throw Error("similarity cache row has the wrong length");
        for (double v : row) {
            auto bits = std::bit_cast<std::uint64_t>(v);
            unsigned char bytes[8];
            for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
            out.write(reinterpret_cast<const char*>(bytes), 8);
        }
    }
    nlohmann::json meta = {
        {"format", "isv-similarity"},
        {"version", 1},
        {"rows", cache.rows.size()},
        {"dimension", cache.dimension},
        {"layout_fingerprint", hex64(cache.layout_fingerprint)},
        {"metrics", suite_id(cache.suite)},
        {"ordering", "mode-major, metric-minor: index = mode * k + metric"},
        {"dtype", "float64-le"},
    };
    std::ofstream side(path.string() + ".json");
    side << meta.dump(2) << '\n';
    if (!out || !side) throw Error("failed writing similarity cache " + path.string());
}

SimilarityCache load_similarity_cache(const std::filesystem::path& path) {
    std::ifstream side(path.string() + ".json");
    if (!side) throw Error("missing similarity cache sidecar " + path.string() + ".json");
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const std::exception& e) {
        throw Error("malformed similarity sidecar: " + std::string(e.what()));
    }
    if (meta.value("format", "") != "isv-similarity" || meta.value("version", 0) != 1)
        throw Error("unsupported similarity cache format");

    SimilarityCache cache;
    cache.dimension = meta.at("dimension").get<std::size_t>();
    const auto rows = meta.at("rows").get<std::size_t>();
    cache.layout_fingerprint = std::stoull(meta.at("layout_fingerprint").get<std::string>(), nullptr, 16);
    const auto ids = meta.at("metrics").get<std::string>();
    std::size_t start = 0;
    while (start <= ids.size()) {
        const auto end = std::min(ids.find(',', start), ids.size());
        cache.suite.push_back(parse_metric(ids.substr(start, end - start)));
        start = end + 1;
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read similarity cache " + path.string());
    cache.rows.assign(rows, std::vector<double>(cache.dimension));
    for (auto& row : cache.rows)
        for (double& v : row) {
            unsigned char bytes[8];
            if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error("similarity cache is truncated");
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
            v = std::bit_cast<double>(bits);
        }
    return cache;
}

}  // namespace isv
