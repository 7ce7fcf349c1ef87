#include "kdc/mask.hpp"

#include <queue>
#include <stdexcept>

namespace kdc {

std::int64_t Mask::area() const {
    std::int64_t n = 0;
    for (std::uint8_t v : data) n += (v != 0);
    return n;
}

SubPixel Mask::centroid() const {
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (at(y, x)) {
                sx += x;
                sy += y;
                ++n;
            }
        }
    }
    if (n == 0) throw std::invalid_argument("Mask::centroid: empty mask");
    return {sx / n, sy / n};
}

bool Mask::is_connected4() const {
    int sx = -1, sy = -1;
    for (int y = 0; y < height && sx < 0; ++y) {
        for (int x = 0; x < width; ++x) {
            if (at(y, x)) {
                sx = x;
                sy = y;
                break;
            }
        }
    }
    if (sx < 0) return false;  // empty

    std::vector<std::uint8_t> seen(data.size(), 0);
    std::queue<std::pair<int, int>> q;
    q.push({sx, sy});
    seen[static_cast<std::size_t>(sy) * width + sx] = 1;
    std::int64_t reached = 0;
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        ++reached;
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx[k];
            const int ny = y + dy[k];
            if (!in_bounds(nx, ny)) continue;
            const std::size_t idx = static_cast<std::size_t>(ny) * width + nx;
            if (!seen[idx] && data[idx]) {
                seen[idx] = 1;
                q.push({nx, ny});
            }
        }
    }
    return reached == area();
}

std::int64_t intersection_area(const Mask& a, const Mask& b) {
    if (a.height != b.height || a.width != b.width) {
        throw std::invalid_argument("intersection_area: shape mismatch");
    }
    std::int64_t n = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) n += (a.data[i] && b.data[i]);
    return n;
}

double mask_iou(const Mask& a, const Mask& b) {
    if (a.height != b.height || a.width != b.width) {
        throw std::invalid_argument("mask_iou: shape mismatch");
    }
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool av = a.data[i] != 0;
        const bool bv = b.data[i] != 0;
        inter += (av && bv);
        uni += (av || bv);
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::int64_t> rle_encode(const Mask& m) {
    std::vector<std::int64_t> counts;
    std::uint8_t current = 0;  // runs start with zeros by convention
    std::int64_t run = 0;
    for (int x = 0; x < m.width; ++x) {
        for (int y = 0; y < m.height; ++y) {
            const std::uint8_t v = m.at(y, x) ? 1 : 0;
            if (v == current) {
                ++run;
            } else {
                counts.push_back(run);
                current = v;
                run = 1;
            }
        }
    }
    counts.push_back(run);
    return counts;
}

Mask rle_decode(const std::vector<std::int64_t>& counts, int height, int width) {
    Mask m(height, width);
    std::int64_t pos = 0;
    std::uint8_t value = 0;
    const std::int64_t total = static_cast<std::int64_t>(height) * width;
    for (std::int64_t run : counts) {
        if (run < 0 || pos + run > total) throw std::invalid_argument("rle_decode: bad counts");
        for (std::int64_t i = 0; i < run; ++i) {
            const std::int64_t idx = pos + i;
            const int x = static_cast<int>(idx / height);
            const int y = static_cast<int>(idx % height);
            m.at(y, x) = value;
        }
        pos += run;
        value ^= 1;
    }
    if (pos != total) throw std::invalid_argument("rle_decode: counts do not cover the mask");
    return m;
}

}  // namespace kdc
