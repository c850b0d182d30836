#pragma once

#include <array>
#include <vector>

#include "isv/dataio.hpp"

namespace isv {

/// Square patch cut from an image; (x, y) is the top-left pixel.
struct Block {
    int x = 0;
    int y = 0;
    int size = 0;
    std::vector<double> values;  ///< row-major, size * size

    double at(int col, int row) const { return values[static_cast<std::size_t>(row) * size + col]; }
};

struct TextureDescriptor {
    std::vector<double> coeffs;
    int block_x = 0;
    int block_y = 0;
};

struct TextureOptions {
    int block_size = 8;
    int block_step = 4;
    int descriptor_dim = 15;
    /// Rescale the retained coefficients to unit variance (off by default).
    bool normalize_variance = false;
};

/// Block grid geometry: blocks sit at multiples of `step` and must fit inside
/// the image.
struct BlockGrid {
    int cols = 0;
    int rows = 0;
    int size = 0;
    int step = 0;

    int count() const { return cols * rows; }
    static BlockGrid for_image(int width, int height, int block_size, int step);
};

/// All fully-contained blocks in row-major order.
std::vector<Block> enumerate_blocks(const GrayImage& image, int block_size = 8, int step = 4);

/// Standard JPEG zigzag scan for an 8x8 block: entry k is the row-major index
/// of the k-th coefficient visited.
inline constexpr std::array<int, 64> kJpegZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

/// Zigzag scan order for an n x n block (same traversal as JPEG for n = 8).
std::vector<int> zigzag_order(int n);

/// Orthonormal 2-D type-II DCT, row-major output indexed [v * n + u] where u
/// is the horizontal and v the vertical frequency.
std::vector<double> dct2(const Block& block);

/// Discards the DC term and keeps the next `dim` zigzag coefficients.
TextureDescriptor dct_descriptor(const Block& block, int dim = 15, bool normalize_variance = false);

/// Descriptors for every block of the image, in enumerate_blocks order.
std::vector<TextureDescriptor> extract_texture(const GrayImage& image, const TextureOptions& options);

}  // namespace isv
