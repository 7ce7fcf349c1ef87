// Training losses as pure scalar functions with analytic gradients.
//
// Loss values are accumulated in double, strictly row-major, so reported
// numbers are bitwise reproducible regardless of the worker count.
#pragma once

#include <cstdint>
#include <functional>

#include "kdc/encoder.hpp"
#include "kdc/field.hpp"

namespace kdc {

struct LossReport {
    double value = 0.0;
    DenseField gradient;  // same shape as the prediction; zero off-support
    std::int64_t num_active = 0;
};

inline constexpr double kBceClamp = 1e-7;

// Mean binary cross-entropy over active pixels. `active` is a single-channel
// {0,1} field (1 = contributes); predictions are clamped to
// [kBceClamp, 1 - kBceClamp] before the logs. N counts (channel, pixel)
// elements at active pixels.
LossReport heatmap_bce(const DenseField& pred, const DenseField& target,
                       const DenseField& active);

// Mean L1 over valid pixels of the per-pixel displacement error; each valid
// pixel contributes |dx_err| + |dy_err|. The prediction must carry
// 2 * joint_count channels matching the target layout. Subgradient at zero
// error is taken as 0.
LossReport keycentroid_l1(const DenseField& pred, const KeyCentroidField& target);

// Mean L1 between predicted and target offsets over the target foreground.
LossReport offset_l1(const OffsetField& pred, const OffsetField& target);

struct FiniteDiffResult {
    double max_rel_err = 0.0;
    int samples = 0;
};

// Central-difference check of an analytic gradient at `min_samples` randomly
// chosen coordinates (skipping those rejected by `skip`, e.g. L1 kinks).
// The divisor uses the actually stored float32 perturbations, so float
// quantization does not pollute the estimate. eps must be in [1e-6, 1e-3].
FiniteDiffResult finite_diff_check(
    const std::function<LossReport(const DenseField&)>& loss, const DenseField& pred,
    double eps, std::uint64_t seed, int min_samples = 100,
    const std::function<bool(int c, int y, int x)>& skip = {});

}  // namespace kdc
