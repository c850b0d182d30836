#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "isv/texture.hpp"

namespace isv {

/// Square p x p window with top-left corner (x, y).
struct RegionSpec {
    int x = 0;
    int y = 0;
    int size = 0;

    bool contains(int px, int py) const { return px >= x && px < x + size && py >= y && py < y + size; }
    friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

enum class CompoundShape { horizontal, vertical, cross };
const char* to_string(CompoundShape shape);

/// Sum-pooled group of direct regions: three cells in a row or column, or
/// five in a cross, with adjacent cell centres `offset` pixels apart.
struct CompoundSpec {
    CompoundShape shape = CompoundShape::horizontal;
    RegionSpec center;
    int offset = 0;
    /// Indices into RegionLayout::direct, middle cell first.
    std::vector<std::size_t> cells;
};

struct LayoutParams {
    int width = 64;
    int height = 64;
    int region_size = 24;
    int region_stride = 1;
    std::vector<int> compound_offsets{4, 8, 12};
};

/// Ordered list of every region described per image. Direct regions come
/// first in row-major order, followed by compounds grouped by shape
/// (horizontal, vertical, cross), then offset, then row-major centre.
class RegionLayout {
public:
    RegionLayout() = default;
    explicit RegionLayout(const LayoutParams& params);

    const LayoutParams& params() const { return params_; }
    const std::vector<RegionSpec>& direct() const { return direct_; }
    const std::vector<CompoundSpec>& compound() const { return compound_; }
    /// nu: number of local modes.
    std::size_t size() const { return direct_.size() + compound_.size(); }
    std::size_t count(CompoundShape shape) const;

    /// Cells of region j (one for a direct region, three or five for a compound).
    std::vector<RegionSpec> cells_of(std::size_t j) const;

    /// FNV-1a hash of the layout parameters.
    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    LayoutParams params_;
    std::vector<RegionSpec> direct_;
    std::vector<CompoundSpec> compound_;
    std::uint64_t fingerprint_ = 0;
};

std::vector<RegionSpec> enumerate_direct(int width, int height, int region_size, int stride);

/// Compound regions over the grid of enumerate_direct(width, height, region_size, stride).
/// Each returned spec's `cells` index into that grid. An offset that is not a
/// multiple of the stride, or too large to fit, contributes nothing.
std::vector<CompoundSpec> enumerate_compound(int width, int height, int region_size,
                                             std::span<const int> offsets, int stride);

/// Summed-area table over a block grid of posterior histograms. Block (c, r)
/// covers pixels [c*step, c*step + size) x [r*step, r*step + size).
class IntegralHistogram {
public:
    /// `block_histograms` is (grid.count() x G), one row per block in row-major order.
    IntegralHistogram(const BlockGrid& grid, const Eigen::MatrixXd& block_histograms);

    const BlockGrid& grid() const { return grid_; }
    int bins() const { return bins_; }

    /// Range of block columns/rows lying fully inside [lo, lo + extent).
    std::pair<int, int> block_span(int lo, int extent, int count) const;

    /// Number of blocks fully inside the region.
    int blocks_inside(const RegionSpec& region) const;

    /// Average of the histograms of the blocks fully inside the region.
    Eigen::VectorXd direct_descriptor(const RegionSpec& region) const;

private:
    BlockGrid grid_;
    int bins_ = 0;
    Eigen::MatrixXd table_;  // ((rows+1)*(cols+1)) x G
};

/// Elementwise sum of the cells' direct descriptors (columns of `direct`, G x |direct|).
/// With `average`, divides by the cell count.
Eigen::VectorXd compound_descriptor(const Eigen::MatrixXd& direct, const CompoundSpec& spec,
                                    bool average = false);

}  // namespace isv
