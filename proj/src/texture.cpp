#include "isv/texture.hpp"

#include <cmath>
#include <numbers>

#include "isv/error.hpp"

namespace isv {

BlockGrid BlockGrid::for_image(int width, int height, int block_size, int step) {
    if (block_size < 1) throw Error("block size must be positive");
    if (step < 1) throw Error("block step must be positive");
    if (block_size > width || block_size > height)
        throw Error("block size " + std::to_string(block_size) + " exceeds image " +
                    std::to_string(width) + "x" + std::to_string(height));
    return {(width - block_size) / step + 1, (height - block_size) / step + 1, block_size, step};
}

std::vector<Block> enumerate_blocks(const GrayImage& image, int block_size, int step) {
    const auto grid = BlockGrid::for_image(image.width, image.height, block_size, step);
    std::vector<Block> blocks;
    blocks.reserve(static_cast<std::size_t>(grid.count()));
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) {
            Block b{c * step, r * step, block_size, {}};
            b.values.resize(static_cast<std::size_t>(block_size) * block_size);
            for (int y = 0; y < block_size; ++y)
                for (int x = 0; x < block_size; ++x)
                    b.values[static_cast<std::size_t>(y) * block_size + x] = image.at(b.x + x, b.y + y);
            blocks.push_back(std::move(b));
        }
    return blocks;
}

std::vector<int> zigzag_order(int n) {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n) * n);
    for (int s = 0; s <= 2 * (n - 1); ++s) {
        const int lo = std::max(0, s - (n - 1));
        const int hi = std::min(s, n - 1);
        if (s % 2 == 0) {
            for (int row = hi; row >= lo; --row) order.push_back(row * n + (s - row));
        } else {
            for (int row = lo; row <= hi; ++row) order.push_back(row * n + (s - row));
        }
    }
    return order;
}

namespace {

// basis[k * n + i] = alpha(k) * cos(pi * (2i + 1) * k / 2n)
std::vector<double> dct_basis(int n) {
    std::vector<double> basis(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        const double alpha = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
        for (int i = 0; i < n; ++i)
            basis[static_cast<std::size_t>(k) * n + i] =
                alpha * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
    return basis;
}

const std::vector<double>& cached_basis(int n) {
    static const std::vector<double> basis8 = dct_basis(8);
    if (n == 8) return basis8;
    thread_local int cached_n = 0;
    thread_local std::vector<double> basis;
    if (cached_n != n) {
        basis = dct_basis(n);
        cached_n = n;
    }
    return basis;
}

}  // namespace

std::vector<double> dct2(const Block& block) {
    const int n = block.size;
    if (n < 1 || block.values.size() != static_cast<std::size_t>(n) * n)
        throw Error("malformed block");
    const auto& basis = cached_basis(n);

    // Rows first (horizontal frequency u), then columns (vertical frequency v).
    std::vector<double> tmp(block.values.size(), 0.0), out(block.values.size(), 0.0);
    for (int y = 0; y < n; ++y)
        for (int u = 0; u < n; ++u) {
            double acc = 0.0;
            for (int x = 0; x < n; ++x) acc += basis[u * n + x] * block.values[y * n + x];
            tmp[y * n + u] = acc;
        }
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) {
            double acc = 0.0;
            for (int y = 0; y < n; ++y) acc += basis[v * n + y] * tmp[y * n + u];
            out[v * n + u] = acc;
        }
    return out;
}

TextureDescriptor dct_descriptor(const Block& block, int dim, bool normalize_variance) {
    const int n = block.size;
    if (dim < 1 || dim > n * n - 1)
        throw Error("descriptor dimension " + std::to_string(dim) + " out of range for block size " +
                    std::to_string(n));
    const auto coeffs = dct2(block);
    const auto order = n == 8 ? std::vector<int>(kJpegZigzag.begin(), kJpegZigzag.end()) : zigzag_order(n);

    TextureDescriptor d;
    d.block_x = block.x;
    d.block_y = block.y;
    d.coeffs.resize(static_cast<std::size_t>(dim));
    // order[0] is DC and is dropped.
    for (int k = 0; k < dim; ++k) d.coeffs[k] = coeffs[order[k + 1]];

    if (normalize_variance) {
        double energy = 0.0;
        for (double c : d.coeffs) energy += c * c;
        const double rms = std::sqrt(energy / dim);
        if (rms > 1e-12)
            for (double& c : d.coeffs) c /= rms;
    }
    return d;
}

std::vector<TextureDescriptor> extract_texture(const GrayImage& image, const TextureOptions& options) {
    const auto blocks = enumerate_blocks(image, options.block_size, options.block_step);
    std::vector<TextureDescriptor> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks)
        out.push_back(dct_descriptor(b, options.descriptor_dim, options.normalize_variance));
    return out;
}

}  // namespace isv
