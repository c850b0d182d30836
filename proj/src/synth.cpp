#include "isv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <cstdio>
#include <system_error>
#include <tuple>

#include "isv/error.hpp"

namespace fs = std::filesystem;

namespace isv {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (split, identity, set, image) so that one split's
// content never depends on another split's size.
std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                           std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t v : {a, b, c, d}) h = splitmix64(h ^ (v + 0x632be59bd9b4e019ULL));
    return std::mt19937_64(h);
}

using Field = std::vector<double>;

Field gaussian_blur(const Field& in, int n, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += kernel[i + radius];
    }
    for (auto& k : kernel) k /= total;

    auto reflect = [n](int i) {
        while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
        return i;
    };
    Field tmp(in.size()), out(in.size());
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * in[y * n + reflect(x + k)];
            tmp[y * n + x] = acc;
        }
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp[reflect(y + k) * n + x];
            out[y * n + x] = acc;
        }
    return out;
}

void standardize(Field& f) {
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= static_cast<double>(f.size());
    double var = 0.0;
    for (double v : f) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(f.size()));
    for (double& v : f) v = sd > 0 ? (v - mean) / sd : 0.0;
}

// Two-scale smoothed white noise with zero mean and unit variance.
Field random_field(std::mt19937_64& rng, int n, const SynthParams& p) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Field white(static_cast<std::size_t>(n) * n);
    for (double& v : white) v = normal(rng);
    Field fine = gaussian_blur(white, n, p.smoothing);
    Field coarse = gaussian_blur(white, n, p.coarse_smoothing);
    standardize(fine);
    standardize(coarse);
    Field out(fine.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fine[i] + 0.6 * coarse[i];
    standardize(out);
    return out;
}

GrayImage render_view(const Field& field, int canvas, std::mt19937_64& rng, const SynthParams& p) {
    const int size = p.image_size;
    const int margin = p.max_translation;
    std::uniform_int_distribution<int> shift(-margin, margin);
    std::uniform_real_distribution<double> offset(-p.illumination_offset, p.illumination_offset);
    std::uniform_real_distribution<double> slope(-p.illumination_gradient, p.illumination_gradient);
    std::normal_distribution<double> noise(0.0, p.noise);

    const int dx = shift(rng);
    const int dy = shift(rng);
    const double base = offset(rng);
    const double gx = slope(rng);
    const double gy = slope(rng);

    GrayImage image(size, size);
    const double centre = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double texture = field[(y + margin + dy) * canvas + (x + margin + dx)];
            double v = 0.5 + p.contrast * texture + base + gx * (x - centre) + gy * (y - centre);
            if (p.noise > 0) v += noise(rng);
            v = std::clamp(v, 0.0, 1.0);
            // Quantize so in-memory images match what a PGM round trip gives.
            image.at(x, y) = std::round(v * 255.0) / 255.0;
        }
    return image;
}

SynthSplit make_split(const std::string& name, int split_index, int identities,
                      const SynthParams& p) {
    if (identities < 2) throw Error("split '" + name + "' needs at least 2 identities");
    if (p.sets_per_identity < 1 || p.images_per_set < 1)
        throw Error("sets_per_identity and images_per_set must be positive");
    if (p.identity_modes < 0 || p.mode_strength < 0)
        throw Error("identity_modes and mode_strength must be non-negative");

    const int canvas = p.image_size + 2 * p.max_translation;
    SynthSplit split;
    split.name = name;
    for (int id = 0; id < identities; ++id) {
        auto id_rng = stream_for(p.seed, split_index, id + 1);
        const Field identity = random_field(id_rng, canvas, p);
        std::vector<Field> modes;
        for (int m = 0; m < p.identity_modes; ++m) modes.push_back(random_field(id_rng, canvas, p));
        for (int s = 0; s < p.sets_per_identity; ++s) {
            auto set_rng = stream_for(p.seed, split_index, id + 1, s + 1);
            Field field = random_field(set_rng, canvas, p);
            for (std::size_t i = 0; i < field.size(); ++i)
                field[i] = identity[i] + p.set_variation * field[i];
            standardize(field);

            ImageSet set;
            char buf[64];
            std::snprintf(buf, sizeof buf, "id%03d/set%02d", id, s);
            set.id = buf;
            for (int k = 0; k < p.images_per_set; ++k) {
                auto view_rng = stream_for(p.seed, split_index, id + 1, s + 1, k + 1);
                if (modes.empty() || p.mode_strength == 0.0) {
                    set.images.push_back(render_view(field, canvas, view_rng, p));
                    continue;
                }
                auto mix_rng = stream_for(p.seed, split_index, id + 1, s + 1, (k + 1) | 0x10000);
                std::normal_distribution<double> coeff(0.0, p.mode_strength);
                Field view = field;
                for (const auto& mode : modes) {
                    const double c = coeff(mix_rng);
                    for (std::size_t i = 0; i < view.size(); ++i) view[i] += c * mode[i];
                }
                standardize(view);
                set.images.push_back(render_view(view, canvas, view_rng, p));
            }
            split.sets.push_back(std::move(set));
            split.identity_of.push_back(id);
        }
    }

    std::vector<IndexedPair> matched, mismatched;
    const std::size_t n = split.sets.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const bool same = split.identity_of[a] == split.identity_of[b];
            (same ? matched : mismatched).push_back({a, b, same ? PairLabel::matched : PairLabel::mismatched});
        }
    const std::size_t capacity = std::min(matched.size(), mismatched.size());
    std::size_t wanted = p.pairs_per_class > 0 ? static_cast<std::size_t>(p.pairs_per_class) : capacity;
    if (wanted > capacity || capacity == 0)
        throw Error("split '" + name + "' can supply at most " + std::to_string(capacity) +
                    " balanced pairs per class");

    auto pair_rng = stream_for(p.seed, split_index, 0, 0, 0xbeef);
    std::shuffle(matched.begin(), matched.end(), pair_rng);
    std::shuffle(mismatched.begin(), mismatched.end(), pair_rng);
    matched.resize(wanted);
    mismatched.resize(wanted);
    auto by_index = [](const IndexedPair& l, const IndexedPair& r) {
        return std::tie(l.a, l.b) < std::tie(r.a, r.b);
    };
    std::sort(matched.begin(), matched.end(), by_index);
    std::sort(mismatched.begin(), mismatched.end(), by_index);
    split.pairs = std::move(matched);
    split.pairs.insert(split.pairs.end(), mismatched.begin(), mismatched.end());
    return split;
}

}  // namespace

LabelCounts SynthSplit::counts() const {
    LabelCounts c;
    for (const auto& pair : pairs) (pair.label == PairLabel::matched ? c.matched : c.mismatched)++;
    return c;
}

SynthDataset synth_dataset(const SynthParams& params) {
    if (params.image_size < 8) throw Error("synthetic images must be at least 8 pixels wide");
    if (params.max_translation < 0) throw Error("max_translation must be non-negative");
    SynthDataset data;
    data.train = make_split("train", 1, params.train_identities, params);
    data.dev = make_split("dev", 2, params.dev_identities, params);
    data.eval = make_split("eval", 3, params.eval_identities, params);
    return data;
}

SynthDataset synth_dataset(int n_identities, int sets_per_identity, int images_per_set,
                           std::uint64_t seed) {
    SynthParams p;
    p.train_identities = p.dev_identities = p.eval_identities = n_identities;
    p.sets_per_identity = sets_per_identity;
    p.images_per_set = images_per_set;
    p.pairs_per_class = 0;
    p.seed = seed;
    return synth_dataset(p);
}

std::vector<fs::path> write_synth_dataset(const SynthDataset& dataset, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw Error("output directory not writable: " + out_dir.string());

    std::vector<fs::path> manifests;
    for (const SynthSplit* split : {&dataset.train, &dataset.dev, &dataset.eval}) {
        std::vector<fs::path> set_dirs;
        for (const auto& set : split->sets) {
            const fs::path dir = out_dir / split->name / set.id;
            fs::create_directories(dir, ec);
            if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
            for (std::size_t k = 0; k < set.images.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "img%02zu.pgm", k);
                save_pgm(set.images[k], dir / name);
            }
            set_dirs.push_back(dir);
        }
        std::vector<PairSpec> specs;
        for (const auto& pair : split->pairs)
            specs.push_back({set_dirs[pair.a], set_dirs[pair.b], pair.label});
        const fs::path manifest = out_dir / (split->name + "_pairs.csv");
        save_pairs_manifest(specs, manifest);
        manifests.push_back(manifest);
    }
    return manifests;
}

}  // namespace isv
