#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "isv/error.hpp"
#include "isv/pipeline.hpp"
#include "isv/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace isv;

namespace {

void emit(const json& j) {
    std::cout << j.dump() << '\n';
    std::cout.flush();
}

void note(const std::string& msg) { std::cerr << "isv: " << msg << '\n'; }

// Config flags shared by the commands that build a pipeline. Each is applied
// only when given, so the precedence is flag > --config file > base.
struct ConfigFlags {
    std::string preset = "full";
    std::string config_file;
    int components = 0;
    int em_max_iters = 0;
    double em_tol = 0;
    int kmeans_iters = 0;
    double variance_floor = 0;
    std::uint64_t seed = 0;
    std::size_t max_samples = 0;
    int block_size = 0;
    int block_step = 0;
    int descriptor_dim = 0;
    bool normalize = false;
    int region_size = 0;
    int region_stride = 0;
    std::vector<int> offsets;
    bool average_compound = false;
    std::vector<std::string> metrics;
    double rank_tol = 0;
    int rounds = 0;
    double epsilon_floor = 0;

    std::vector<std::pair<std::string, CLI::Option*>> options;

    void add(CLI::App* app, bool with_preset) {
        if (with_preset)
            app->add_option("--preset", preset, "Base parameter set")
                ->check(CLI::IsMember({"full", "desk"}))
                ->capture_default_str();
        app->add_option("--config", config_file, "JSON file overriding the base parameters")
            ->check(CLI::ExistingFile);
        auto reg = [&](const char* key, CLI::Option* o) { options.emplace_back(key, o); };
        reg("components", app->add_option("--components", components, "Dictionary size G"));
        reg("em_max_iters", app->add_option("--em-max-iters", em_max_iters, "EM iteration cap"));
        reg("em_tol", app->add_option("--em-tol", em_tol, "EM log-likelihood tolerance"));
        reg("kmeans_iters", app->add_option("--kmeans-iters", kmeans_iters, "k-means initialisation iterations"));
        reg("variance_floor", app->add_option("--variance-floor", variance_floor, "Minimum GMM variance"));
        reg("dictionary_seed", app->add_option("--seed", seed, "Dictionary training seed"));
        reg("max_dictionary_samples",
            app->add_option("--max-samples", max_samples, "Descriptor subsample for EM (0 = all)"));
        reg("block_size", app->add_option("--block-size", block_size, "DCT block size"));
        reg("block_step", app->add_option("--block-step", block_step, "DCT block step"));
        reg("descriptor_dim", app->add_option("--descriptor-dim", descriptor_dim, "AC coefficients kept"));
        reg("normalize_descriptor",
            app->add_flag("--normalize-descriptor", normalize, "Scale descriptors to unit RMS"));
        reg("region_size", app->add_option("--region-size", region_size, "Direct region size p"));
        reg("region_stride", app->add_option("--region-stride", region_stride, "Direct region stride"));
        reg("compound_offsets",
            app->add_option("--offsets", offsets, "Compound region offsets")->delimiter(','));
        reg("average_compound",
            app->add_flag("--average-compound", average_compound, "Average compound cells instead of summing"));
        reg("metrics", app->add_option("--metrics", metrics, "Metric suite, e.g. geodesic,binet_cauchy,hausdorff,mhd")
                           ->delimiter(','));
        reg("rank_tol", app->add_option("--rank-tol", rank_tol, "Relative singular value cut-off"));
        reg("rounds", app->add_option("--rounds", rounds, "Boosting rounds Q"));
        reg("epsilon_floor", app->add_option("--epsilon-floor", epsilon_floor, "Floor on weighted error"));
    }

    json given() const {
        json j = json::object();
        for (const auto& [key, opt] : options) {
            if (opt->count() == 0) continue;
            if (key == "components") j[key] = components;
            else if (key == "em_max_iters") j[key] = em_max_iters;
            else if (key == "em_tol") j[key] = em_tol;
            else if (key == "kmeans_iters") j[key] = kmeans_iters;
            else if (key == "variance_floor") j[key] = variance_floor;
            else if (key == "dictionary_seed") j[key] = seed;
            else if (key == "max_dictionary_samples") j[key] = max_samples;
            else if (key == "block_size") j[key] = block_size;
            else if (key == "block_step") j[key] = block_step;
            else if (key == "descriptor_dim") j[key] = descriptor_dim;
            else if (key == "normalize_descriptor") j[key] = normalize;
            else if (key == "region_size") j[key] = region_size;
            else if (key == "region_stride") j[key] = region_stride;
            else if (key == "compound_offsets") j[key] = offsets;
            else if (key == "average_compound") j[key] = average_compound;
            else if (key == "metrics") j[key] = metrics;
            else if (key == "rank_tol") j[key] = rank_tol;
            else if (key == "rounds") j[key] = rounds;
            else if (key == "epsilon_floor") j[key] = epsilon_floor;
        }
        return j;
    }

    PipelineConfig resolve(std::optional<PipelineConfig> base = std::nullopt) const {
        PipelineConfig c = base ? *base : (preset == "desk" ? PipelineConfig::desk() : PipelineConfig::full());
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw Error("cannot parse " + config_file + ": " + e.what());
            }
            c = config_from_json(j, c);
        }
        c = config_from_json(given(), c);
        c.validate();
        return c;
    }
};

PairCollection load_manifest(const std::string& path) {
    const auto specs = load_pairs_manifest(path);
    if (specs.empty()) throw Error("manifest " + path + " lists no pairs");
    return load_pair_collection(specs);
}

json counts_json(const PairCollection& c) {
    std::size_t matched = 0;
    for (const auto& p : c.pairs) matched += p.label == PairLabel::matched;
    return {{"pairs", c.pairs.size()}, {"matched", matched}, {"mismatched", c.pairs.size() - matched},
            {"sets", c.sets.size()}};
}

// Subject directory of a set: the parent of the set directory.
std::set<fs::path> subjects_of(const std::vector<PairSpec>& specs) {
    std::set<fs::path> out;
    for (const auto& s : specs)
        for (const auto& dir : {s.set_a, s.set_b}) out.insert(fs::weakly_canonical(dir).parent_path());
    return out;
}

int cmd_synth(const SynthParams& params, const std::string& out) {
    const auto data = synth_dataset(params);
    const auto manifests = write_synth_dataset(data, out);
    json j = {{"command", "synth"}, {"out", out}, {"seed", params.seed}};
    const SynthSplit* splits[] = {&data.train, &data.dev, &data.eval};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto c = splits[i]->counts();
        j[splits[i]->name] = {{"manifest", manifests[i].string()},
                              {"sets", splits[i]->sets.size()},
                              {"matched", c.matched},
                              {"mismatched", c.mismatched}};
    }
    emit(j);
    return 0;
}

int cmd_train_dictionary(const ConfigFlags& flags, const std::string& manifest,
                         const std::vector<std::string>& disjoint_from, const std::string& out) {
    const auto config = flags.resolve();
    const auto specs = load_pairs_manifest(manifest);
    if (specs.empty()) throw Error("manifest " + manifest + " lists no pairs");
    if (!disjoint_from.empty()) {
        const auto train_subjects = subjects_of(specs);
        for (const auto& other : disjoint_from) {
            for (const auto& s : subjects_of(load_pairs_manifest(other)))
                if (train_subjects.count(s))
                    throw Error("training subject " + s.string() + " also appears in " + other);
        }
    }
    const auto collection = load_pair_collection(specs);
    note("pooling descriptors from " + std::to_string(collection.sets.size()) + " sets");
    const auto pool = pool_descriptors(collection.sets, config);
    note("training " + std::to_string(config.components) + "-component dictionary on " +
         std::to_string(pool.rows()) + " descriptors");
    const auto result = train_dictionary(pool, config.dictionary_options());
    save_dictionary({config, result.dictionary}, out);
    emit({{"command", "train-dictionary"},
          {"out", out},
          {"sets", collection.sets.size()},
          {"samples", pool.rows()},
          {"components", result.dictionary.components()},
          {"iterations", result.iterations},
          {"converged", result.converged},
          {"log_likelihood", result.log_likelihood.back()}});
    return 0;
}

LabeledVectors vectors_for(const FeatureExtractor& extractor, const PairCollection& c, unsigned workers) {
    const auto features = extractor.extract_all(c.sets, workers);
    return pair_vectors(features, c.pairs, extractor.config().metrics, workers);
}

int cmd_train(const ConfigFlags& flags, const std::string& dictionary_path, const std::string& train_manifest,
              const std::string& dev_manifest, const std::string& out, const std::string& cache_path,
              unsigned workers) {
    auto dict = load_dictionary(dictionary_path);
    const auto config = flags.resolve(dict.config);
    if (config.components != dict.dictionary.components() || config.descriptor_dim != dict.dictionary.dim() ||
        config.block_size != dict.config.block_size || config.block_step != dict.config.block_step ||
        config.normalize_descriptor != dict.config.normalize_descriptor)
        throw Error("texture or dictionary parameters differ from those the dictionary was trained with");

    const FeatureExtractor extractor(config, dict.dictionary);
    const auto train_pairs = load_manifest(train_manifest);
    note("extracting features for " + std::to_string(train_pairs.sets.size()) + " training sets");
    const auto train = vectors_for(extractor, train_pairs, workers);
    if (!cache_path.empty())
        save_similarity_cache({extractor.layout().fingerprint(), config.metrics,
                               train.vectors.empty() ? 0 : train.vectors.front().size(), train.vectors},
                              cache_path);

    LabeledVectors dev_storage;
    const LabeledVectors* dev = &train;
    if (!dev_manifest.empty() && dev_manifest != train_manifest) {
        dev_storage = vectors_for(extractor, load_manifest(dev_manifest), workers);
        dev = &dev_storage;
    }
    note("boosting " + std::to_string(config.rounds) + " rounds over " +
         std::to_string(train.vectors.front().size()) + " features");
    const auto model = train_model(extractor, train, *dev, workers);
    save_model(model, out);
    const auto report = evaluate(model.verifier, *dev);
    emit({{"command", "train"},
          {"out", out},
          {"train", counts_json(train_pairs)},
          {"feature_dimension", model.verifier.feature_dimension},
          {"rounds", model.verifier.stumps.size()},
          {"unique_features", model.verifier.unique_features()},
          {"tau", model.verifier.tau},
          {"dev_balanced_accuracy", report.balanced_accuracy}});
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& manifest, const std::string& csv_path,
                 unsigned workers) {
    const auto model = load_model(model_path);
    const FeatureExtractor extractor(model.config, model.dictionary);
    const auto specs = load_pairs_manifest(manifest);
    if (specs.empty()) throw Error("manifest " + manifest + " lists no pairs");
    const auto collection = load_pair_collection(specs);
    const auto data = vectors_for(extractor, collection, workers);
    const auto r = evaluate(model.verifier, data);
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw Error("cannot write " + csv_path);
        csv << "set_a,set_b,label,score,predicted\n";
        csv.precision(17);
        for (std::size_t i = 0; i < specs.size(); ++i)
            csv << specs[i].set_a.string() << ',' << specs[i].set_b.string() << ',' << to_string(specs[i].label)
                << ',' << r.scores[i] << ',' << (r.predicted[i] > 0 ? "matched" : "mismatched") << '\n';
    }
    emit({{"command", "evaluate"},
          {"pairs", specs.size()},
          {"matched", r.matched},
          {"mismatched", r.mismatched},
          {"matched_accuracy", r.matched_accuracy},
          {"mismatched_accuracy", r.mismatched_accuracy},
          {"balanced_accuracy", r.balanced_accuracy},
          {"tau", model.verifier.tau}});
    return 0;
}

int cmd_verify(const std::string& model_path, const std::string& a, const std::string& b) {
    const auto model = load_model(model_path);
    const FeatureExtractor extractor(model.config, model.dictionary);
    const auto fa = extractor.extract(load_image_set(a));
    const auto fb = extractor.extract(load_image_set(b));
    const auto d = model.verifier.classify(similarity_vector(fa, fb, model.config.metrics));
    emit({{"command", "verify"},
          {"set_a", a},
          {"set_b", b},
          {"decision", d.matched ? "matched" : "mismatched"},
          {"score", d.score},
          {"tau", model.verifier.tau}});
    return 0;
}

int cmd_weight_map(const std::string& model_path, const std::string& out) {
    const auto model = load_model(model_path);
    const RegionLayout layout(model.config.layout());
    const auto map = cumulative_weight_map(model.verifier, layout, model.config.metrics.size(),
                                           model.config.image_width, model.config.image_height);
    save_weight_map(map, out);
    auto raw = fs::path(out);
    raw.replace_extension(".f32");
    emit({{"command", "weight-map"},
          {"out", out},
          {"raw", raw.string()},
          {"width", map.width},
          {"height", map.height},
          {"max_weight", *std::max_element(map.values.begin(), map.values.end())}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Image set verification with local multi-metric descriptors and boosting"};
    app.require_subcommand(1);
    unsigned workers = 1;
    app.add_option("--workers", workers, "Worker threads for feature extraction and boosting")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // synth
    SynthParams sp;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with train/dev/eval manifests");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", sp.seed, "Generator seed")->capture_default_str();
    synth->add_option("--train-identities", sp.train_identities)->capture_default_str();
    synth->add_option("--dev-identities", sp.dev_identities)->capture_default_str();
    synth->add_option("--eval-identities", sp.eval_identities)->capture_default_str();
    synth->add_option("--sets-per-identity", sp.sets_per_identity)->capture_default_str();
    synth->add_option("--images-per-set", sp.images_per_set)->capture_default_str();
    synth->add_option("--pairs-per-class", sp.pairs_per_class, "0 = as many as balance allows")
        ->capture_default_str();
    synth->add_option("--image-size", sp.image_size)->capture_default_str();
    synth->add_option("--contrast", sp.contrast)->capture_default_str();
    synth->add_option("--set-variation", sp.set_variation)->capture_default_str();
    synth->add_option("--identity-modes", sp.identity_modes, "Variation fields per identity")->capture_default_str();
    synth->add_option("--mode-strength", sp.mode_strength, "Per-image weight on the variation fields")
        ->capture_default_str();
    synth->add_option("--max-translation", sp.max_translation)->capture_default_str();
    synth->add_option("--noise", sp.noise)->capture_default_str();

    // train-dictionary
    ConfigFlags dict_flags;
    std::string dict_manifest, dict_out;
    std::vector<std::string> disjoint_from;
    auto* tdict = app.add_subcommand("train-dictionary", "Fit the visual dictionary on training-group images");
    tdict->add_option("--train", dict_manifest, "Manifest whose set directories supply the images")->required();
    tdict->add_option("--disjoint-from", disjoint_from,
                      "Manifests whose subjects must not appear in the training group");
    tdict->add_option("--out", dict_out, "Dictionary file")->required();
    dict_flags.add(tdict, true);

    // train
    ConfigFlags train_flags;
    std::string train_dict, train_manifest, dev_manifest, model_out, cache_out;
    auto* train = app.add_subcommand("train", "Boost a verifier and tune its threshold");
    train->add_option("--dictionary", train_dict, "Dictionary file")->required();
    train->add_option("--pairs", train_manifest, "Pairs used for boosting")->required();
    train->add_option("--dev", dev_manifest, "Pairs used to tune the threshold (default: --pairs)");
    train->add_option("--out", model_out, "Model file")->required();
    train->add_option("--similarity-cache", cache_out, "Also write the boosting similarity vectors here");
    train_flags.add(train, false);

    // evaluate
    std::string eval_model, eval_manifest, eval_csv;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Balanced accuracy of a model on a pairs manifest");
    evaluate_cmd->add_option("--model", eval_model)->required();
    evaluate_cmd->add_option("--pairs", eval_manifest)->required();
    evaluate_cmd->add_option("--scores", eval_csv, "Per-pair scores as CSV");

    // verify
    std::string verify_model, set_a, set_b;
    auto* verify = app.add_subcommand("verify", "Decide whether two image set directories match");
    verify->add_option("--model", verify_model)->required();
    verify->add_option("set_a", set_a)->required();
    verify->add_option("set_b", set_b)->required();

    // weight-map
    std::string wm_model, wm_out;
    auto* wmap = app.add_subcommand("weight-map", "Render cumulative region weights as a PGM");
    wmap->add_option("--model", wm_model)->required();
    wmap->add_option("--out", wm_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) return cmd_synth(sp, synth_out);
        if (*tdict) return cmd_train_dictionary(dict_flags, dict_manifest, disjoint_from, dict_out);
        if (*train)
            return cmd_train(train_flags, train_dict, train_manifest, dev_manifest, model_out, cache_out, workers);
        if (*evaluate_cmd) return cmd_evaluate(eval_model, eval_manifest, eval_csv, workers);
        if (*verify) return cmd_verify(verify_model, set_a, set_b);
        if (*wmap) return cmd_weight_map(wm_model, wm_out);
    } catch (const std::exception& e) {
        std::cerr << "isv: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
