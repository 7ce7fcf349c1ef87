// Binary masks, mask geometry, and the COCO uncompressed RLE counts format.
#pragma once

#include <cstdint>
#include <vector>

#include "kdc/field.hpp"

namespace kdc {

struct Mask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;  // row-major, 0 or 1

    Mask() = default;
    Mask(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(h) * w, 0) {}

    std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    std::int64_t area() const;
    bool empty_mask() const { return area() == 0; }

    // Mean of set pixel coordinates. Requires a nonempty mask.
    SubPixel centroid() const;

    // Single 4-connected component check.
    bool is_connected4() const;
};

std::int64_t intersection_area(const Mask& a, const Mask& b);

// |a & b| / |a | b|; 0 when the union is empty. Throws std::invalid_argument
// on shape mismatch.
double mask_iou(const Mask& a, const Mask& b);

// COCO uncompressed RLE: run lengths of the mask flattened in column-major
// order (row index varies fastest), starting with the run of zeros.
std::vector<std::int64_t> rle_encode(const Mask& m);
Mask rle_decode(const std::vector<std::int64_t>& counts, int height, int width);

}  // namespace kdc
