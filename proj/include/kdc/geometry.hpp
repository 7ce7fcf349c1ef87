// Disk membership and the normalized Gaussian kernel shared by every stage.
#pragma once

#include <algorithm>
#include <cmath>

#include "kdc/field.hpp"

namespace kdc {

// True iff the Euclidean distance from p to q is <= radius. The boundary is
// inclusive. Throws std::invalid_argument for radius <= 0.
bool disk_contains(GridPoint p, SubPixel q, double radius);

// (1 / 2*pi*sigma^2) * exp(-(x^2 + y^2) / (2*sigma^2)).
// Throws std::invalid_argument for sigma <= 0.
double gaussian_kernel(double x, double y, double sigma);

// Visits every integer pixel inside the disk of the given radius around q,
// clipped to [0,w) x [0,h). The membership test is exact: coordinates are
// 1/256-quantized, so dx*dx + dy*dy <= r*r has no rounding at the boundary.
template <typename Fn>
void for_each_disk_pixel(SubPixel q, double radius, int height, int width, Fn&& fn) {
    const double r2 = radius * radius;
    int y0 = static_cast<int>(std::ceil(q.y - radius));
    int y1 = static_cast<int>(std::floor(q.y + radius));
    int x0 = static_cast<int>(std::ceil(q.x - radius));
    int x1 = static_cast<int>(std::floor(q.x + radius));
    y0 = std::max(y0, 0);
    x0 = std::max(x0, 0);
    y1 = std::min(y1, height - 1);
    x1 = std::min(x1, width - 1);
    for (int y = y0; y <= y1; ++y) {
        const double dy = y - q.y;
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - q.x;
            if (dx * dx + dy * dy <= r2) fn(x, y);
        }
    }
}

}  // namespace kdc
