#include "isv/regions.hpp"

#include "isv/error.hpp"

namespace isv {

const char* to_string(CompoundShape shape) {
    switch (shape) {
        case CompoundShape::horizontal: return "horizontal";
        case CompoundShape::vertical: return "vertical";
        case CompoundShape::cross: return "cross";
    }
    return "?";
}

std::vector<RegionSpec> enumerate_direct(int width, int height, int region_size, int stride) {
    if (region_size < 1) throw Error("region size must be positive");
    if (stride < 1) throw Error("region stride must be positive");
    if (region_size > width || region_size > height)
        throw Error("region size " + std::to_string(region_size) + " exceeds image " +
                    std::to_string(width) + "x" + std::to_string(height));
    std::vector<RegionSpec> out;
    for (int y = 0; y + region_size <= height; y += stride)
        for (int x = 0; x + region_size <= width; x += stride) out.push_back({x, y, region_size});
    return out;
}

std::vector<CompoundSpec> enumerate_compound(int width, int height, int region_size,
                                             std::span<const int> offsets, int stride) {
    const auto direct = enumerate_direct(width, height, region_size, stride);
    const int cols = (width - region_size) / stride + 1;
    const int rows = (height - region_size) / stride + 1;
    auto index = [cols](int c, int r) { return static_cast<std::size_t>(r) * cols + c; };

    std::vector<CompoundSpec> out;
    for (auto shape : {CompoundShape::horizontal, CompoundShape::vertical, CompoundShape::cross}) {
        for (int offset : offsets) {
            if (offset < 1) throw Error("compound offsets must be positive");
            if (offset % stride != 0) continue;
            const int k = offset / stride;
            const int kx = shape == CompoundShape::vertical ? 0 : k;
            const int ky = shape == CompoundShape::horizontal ? 0 : k;
            for (int r = ky; r + ky < rows; ++r)
                for (int c = kx; c + kx < cols; ++c) {
                    CompoundSpec spec{shape, direct[index(c, r)], offset, {index(c, r)}};
                    if (kx) {
                        spec.cells.push_back(index(c - kx, r));
                        spec.cells.push_back(index(c + kx, r));
                    }
                    if (ky) {
                        spec.cells.push_back(index(c, r - ky));
                        spec.cells.push_back(index(c, r + ky));
                    }
                    out.push_back(std::move(spec));
                }
        }
    }
    return out;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::int64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= static_cast<std::uint64_t>(v >> (8 * i)) & 0xffU;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

RegionLayout::RegionLayout(const LayoutParams& params) : params_(params) {
    direct_ = enumerate_direct(params.width, params.height, params.region_size, params.region_stride);
    compound_ = enumerate_compound(params.width, params.height, params.region_size,
                                   params.compound_offsets, params.region_stride);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int v : {params.width, params.height, params.region_size, params.region_stride})
        h = fnv1a(h, v);
    h = fnv1a(h, static_cast<std::int64_t>(params.compound_offsets.size()));
    for (int o : params.compound_offsets) h = fnv1a(h, o);
    fingerprint_ = h;
}

std::size_t RegionLayout::count(CompoundShape shape) const {
    std::size_t n = 0;
    for (const auto& c : compound_) n += c.shape == shape;
    return n;
}

std::vector<RegionSpec> RegionLayout::cells_of(std::size_t j) const {
    if (j < direct_.size()) return {direct_[j]};
    if (j >= size()) throw Error("region index " + std::to_string(j) + " outside layout");
    std::vector<RegionSpec> cells;
    for (auto idx : compound_[j - direct_.size()].cells) cells.push_back(direct_[idx]);
    return cells;
}

IntegralHistogram::IntegralHistogram(const BlockGrid& grid, const Eigen::MatrixXd& block_histograms)
    : grid_(grid), bins_(static_cast<int>(block_histograms.cols())) {
    if (block_histograms.rows() != grid.count())
        throw Error("block histogram count does not match block grid");
    const int w = grid.cols + 1;
    table_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w) * (grid.rows + 1), bins_);
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c)
            table_.row((r + 1) * w + c + 1) = block_histograms.row(r * grid.cols + c) +
                                              table_.row(r * w + c + 1) + table_.row((r + 1) * w + c) -
                                              table_.row(r * w + c);
}

std::pair<int, int> IntegralHistogram::block_span(int lo, int extent, int count) const {
    // first index with i*step >= lo, last with i*step + size <= lo + extent
    const int first = (lo + grid_.step - 1) / grid_.step;
    const int hi = lo + extent - grid_.size;
    const int last = hi < 0 ? -1 : std::min(count - 1, hi / grid_.step);
    return {first, last};
}

int IntegralHistogram::blocks_inside(const RegionSpec& region) const {
    const auto [c0, c1] = block_span(region.x, region.size, grid_.cols);
    const auto [r0, r1] = block_span(region.y, region.size, grid_.rows);
    if (c1 < c0 || r1 < r0) return 0;
    return (c1 - c0 + 1) * (r1 - r0 + 1);
}

Eigen::VectorXd IntegralHistogram::direct_descriptor(const RegionSpec& region) const {
    if (region.x < 0 || region.y < 0) throw Error("region outside image");
    const auto [c0, c1] = block_span(region.x, region.size, grid_.cols);
    const auto [r0, r1] = block_span(region.y, region.size, grid_.rows);
    if (c1 < c0 || r1 < r0)
        throw Error("region at (" + std::to_string(region.x) + "," + std::to_string(region.y) +
                    ") contains no complete block");
    const int w = grid_.cols + 1;
    const Eigen::VectorXd sum = (table_.row((r1 + 1) * w + c1 + 1) - table_.row(r0 * w + c1 + 1) -
                                 table_.row((r1 + 1) * w + c0) + table_.row(r0 * w + c0))
                                    .transpose();
    return sum / static_cast<double>((c1 - c0 + 1) * (r1 - r0 + 1));
}

Eigen::VectorXd compound_descriptor(const Eigen::MatrixXd& direct, const CompoundSpec& spec, bool average) {
    if (spec.cells.empty()) throw Error("compound region has no cells");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(direct.rows());
    for (auto idx : spec.cells) {
        if (idx >= static_cast<std::size_t>(direct.cols()))
            throw Error("compound cell " + std::to_string(idx) + " has no direct descriptor");
        sum += direct.col(static_cast<Eigen::Index>(idx));
    }
    if (average) sum /= static_cast<double>(spec.cells.size());
    return sum;
}

}  // namespace isv
