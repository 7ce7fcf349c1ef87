#include "kdc/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kdc {

bool disk_contains(GridPoint p, SubPixel q, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("disk_contains: radius must be > 0");
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    return dx * dx + dy * dy <= radius * radius;
}

double gaussian_kernel(double x, double y, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
    const double s2 = sigma * sigma;
    return std::exp(-(x * x + y * y) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
}

}  // namespace kdc
