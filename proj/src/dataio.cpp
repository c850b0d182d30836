#include "isv/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "isv/error.hpp"

namespace fs = std::filesystem;

namespace isv {

GrayImage::GrayImage(int w, int h, double fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw Error("image dimensions must be positive");
}

const char* to_string(PairLabel label) {
    return label == PairLabel::matched ? "matched" : "mismatched";
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            if (!token.empty()) return token;
            continue;
        }
        if (std::isspace(c)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(c));
    }
    return token;
}

int parse_header_int(std::istream& in, const fs::path& path, const char* what) {
    const std::string token = next_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size() || value <= 0) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw Error(path.string() + ": bad PGM " + what + " '" + token + "'");
    }
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

GrayImage load_image(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read image " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() < 2) throw Error(path.string() + ": empty or truncated file");
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P')
        throw Error(path.string() + ": unsupported format (PNG); convert to PGM");
    if (magic[0] != 'P') throw Error(path.string() + ": unsupported format");
    const char kind = magic[1];
    if (kind == '3' || kind == '6')
        throw Error(path.string() + ": non-grayscale image (PPM colour)");
    if (kind != '2' && kind != '5') throw Error(path.string() + ": unsupported format P" + kind);

    const int width = parse_header_int(in, path, "width");
    const int height = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (maxval > 255) throw Error(path.string() + ": only 8-bit PGM is supported");

    GrayImage image(width, height);
    const double levels = maxval;
    if (kind == '5') {
        std::vector<unsigned char> raw(image.pixels.size());
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw Error(path.string() + ": truncated pixel data");
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] > maxval) throw Error(path.string() + ": pixel exceeds maxval");
            image.pixels[i] = raw[i] / levels;
        }
    } else {
        for (auto& px : image.pixels) {
            const std::string token = next_token(in);
            if (token.empty()) throw Error(path.string() + ": truncated pixel data");
            const int v = std::stoi(token);
            if (v < 0 || v > maxval) throw Error(path.string() + ": pixel out of range");
            px = v / levels;
        }
    }
    return image;
}

void save_pgm(const GrayImage& image, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write image " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    std::vector<unsigned char> raw(image.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = std::clamp(image.pixels[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw Error("failed writing " + path.string());
}

ImageSet load_image_set(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error("image set directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error("no PGM images in " + dir.string());

    ImageSet set;
    set.id = dir.string();
    for (const auto& f : files) {
        set.images.push_back(load_image(f));
        const auto& first = set.images.front();
        const auto& last = set.images.back();
        if (last.width != first.width || last.height != first.height)
            throw Error(f.string() + ": image size differs from the rest of the set");
    }
    return set;
}

std::vector<PairSpec> load_pairs_manifest(const fs::path& path, bool check_paths) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read manifest " + path.string());
    const fs::path base = path.parent_path();

    std::vector<PairSpec> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string content = trim(line);
        if (content.empty() || content.front() == '#') continue;

        std::vector<std::string> fields;
        std::stringstream ss(content);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 3) throw Error(where + ": expected 3 comma-separated fields");

        PairSpec spec;
        if (fields[2] == "matched") {
            spec.label = PairLabel::matched;
        } else if (fields[2] == "mismatched") {
            spec.label = PairLabel::mismatched;
        } else {
            throw Error(where + ": unknown label '" + fields[2] + "'");
        }
        if (fields[0].empty() || fields[1].empty()) throw Error(where + ": empty set directory");
        spec.set_a = fs::path(fields[0]).is_absolute() ? fs::path(fields[0]) : base / fields[0];
        spec.set_b = fs::path(fields[1]).is_absolute() ? fs::path(fields[1]) : base / fields[1];
        if (check_paths) {
            for (const auto& dir : {spec.set_a, spec.set_b})
                if (!fs::is_directory(dir))
                    throw Error(where + ": set directory does not exist: " + dir.string());
        }
        pairs.push_back(std::move(spec));
    }
    return pairs;
}

void save_pairs_manifest(const std::vector<PairSpec>& pairs, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest " + path.string());
    const fs::path base = path.parent_path();
    auto rel = [&](const fs::path& p) {
        if (base.empty()) return p.generic_string();
        const auto r = p.lexically_relative(base);
        return r.empty() ? p.generic_string() : r.generic_string();
    };
    for (const auto& pair : pairs)
        out << rel(pair.set_a) << ',' << rel(pair.set_b) << ',' << to_string(pair.label) << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

LabelCounts count_labels(const std::vector<PairSpec>& pairs) {
    LabelCounts counts;
    for (const auto& p : pairs) {
        if (p.label == PairLabel::matched)
            ++counts.matched;
        else
            ++counts.mismatched;
    }
    return counts;
}

GrayImage translate_image(const GrayImage& image, int dx, int dy) {
    GrayImage out(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        const int sy = std::clamp(y - dy, 0, image.height - 1);
        for (int x = 0; x < image.width; ++x) {
            const int sx = std::clamp(x - dx, 0, image.width - 1);
            out.at(x, y) = image.at(sx, sy);
        }
    }
    return out;
}

}  // namespace isv
