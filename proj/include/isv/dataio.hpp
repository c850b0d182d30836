#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace isv {

/// Row-major grayscale image with intensities in [0, 1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// An ordered collection of images of one identity. Order matters: it fixes
/// the column order of every local mode built from the set.
struct ImageSet {
    std::string id;
    std::vector<GrayImage> images;
};

enum class PairLabel { matched, mismatched };

/// +1 for matched, -1 for mismatched.
inline int label_sign(PairLabel label) { return label == PairLabel::matched ? 1 : -1; }
const char* to_string(PairLabel label);

struct PairSpec {
    std::filesystem::path set_a;
    std::filesystem::path set_b;
    PairLabel label = PairLabel::matched;
};

/// A pair referring to image sets by position in some set list.
struct IndexedPair {
    std::size_t a = 0;
    std::size_t b = 0;
    PairLabel label = PairLabel::matched;
};

struct LabelCounts {
    std::size_t matched = 0;
    std::size_t mismatched = 0;
    bool balanced() const { return matched == mismatched; }
};

/// Reads an 8-bit grayscale PGM (binary P5 or ASCII P2). Intensities are
/// divided by the header's maxval, which is 255 for every file we write.
GrayImage load_image(const std::filesystem::path& path);

/// Writes a binary P5 PGM, rounding intensities to the nearest of 256 levels.
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Loads every *.pgm in `dir` in lexicographic filename order.
ImageSet load_image_set(const std::filesystem::path& dir);

/// Parses a `setA_dir,setB_dir,label` manifest. Relative directories are
/// resolved against the manifest's own directory. Blank lines and lines
/// starting with '#' are skipped. With `check_paths`, every directory must
/// exist.
std::vector<PairSpec> load_pairs_manifest(const std::filesystem::path& path,
                                          bool check_paths = true);

/// Writes a manifest; directories are written relative to the manifest's
/// directory when possible.
void save_pairs_manifest(const std::vector<PairSpec>& pairs,
                         const std::filesystem::path& path);

LabelCounts count_labels(const std::vector<PairSpec>& pairs);

/// Shifts content by (dx, dy) pixels, replicating edge pixels into the
/// uncovered border.
GrayImage translate_image(const GrayImage& image, int dx, int dy);

}  // namespace isv
