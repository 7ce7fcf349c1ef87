// Gaussian smoothing of dense fields.
//
// The discrete kernel is truncated at ceil(3*sigma) and renormalized to sum
// to one; at field borders the in-bounds taps are renormalized again (zero
// padding never darkens edges, constants stay constant). The production
// path is a separable two-pass filter parallelized with OpenMP; the direct
// 2D convolution in kdc::ref computes the same values serially and is kept
// as the test oracle and benchmark baseline.
#pragma once

#include <span>
#include <vector>

#include "kdc/field.hpp"

namespace kdc {

// One sigma per channel. Throws std::invalid_argument when the list length
// does not match the channel count or any sigma is <= 0.
DenseField smooth_gaussian(const DenseField& field, std::span<const double> sigma_per_channel);

// Same sigma for every channel.
DenseField smooth_gaussian(const DenseField& field, double sigma);

// Truncated, normalized half-kernel [w0, w1, ..., wr] with r = ceil(3*sigma).
std::vector<double> gaussian_taps(double sigma);

namespace ref {

// Dense direct 2D convolution, single-threaded. Reference implementation.
DenseField smooth_gaussian_direct(const DenseField& field,
                                  std::span<const double> sigma_per_channel);

}  // namespace ref

}  // namespace kdc
