#include "kdc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kdc/rng.hpp"

namespace kdc {

namespace {

double clamp_prob(double p) { return std::clamp(p, kBceClamp, 1.0 - kBceClamp); }

// Sign with the L1 subgradient convention sign(0) = 0.
double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

LossReport heatmap_bce(const DenseField& pred, const DenseField& target,
                       const DenseField& active) {
    if (!pred.same_shape(target)) throw std::invalid_argument("heatmap_bce: shape mismatch");
    if (active.channels() != 1 || active.height() != pred.height() ||
        active.width() != pred.width()) {
        throw std::invalid_argument("heatmap_bce: active mask shape mismatch");
    }
    std::int64_t active_pixels = 0;
    for (float v : active.raw()) active_pixels += (v != 0.0f);
    const std::int64_t n = active_pixels * pred.channels();
    if (n == 0) throw std::runtime_error("heatmap_bce: no active pixels");

    LossReport report;
    report.num_active = n;
    report.gradient = DenseField(pred.height(), pred.width(), pred.channels());
    double sum = 0.0;
    for (int c = 0; c < pred.channels(); ++c) {
        for (int y = 0; y < pred.height(); ++y) {
            for (int x = 0; x < pred.width(); ++x) {
                if (active.at(0, y, x) == 0.0f) continue;
                const double yh = clamp_prob(pred.at(c, y, x));
                const double yt = target.at(c, y, x);
                sum -= yt * std::log(yh) + (1.0 - yt) * std::log(1.0 - yh);
                report.gradient.at(c, y, x) =
                    static_cast<float>((yh - yt) / (yh * (1.0 - yh)) / static_cast<double>(n));
            }
        }
    }
    report.value = sum / static_cast<double>(n);
    return report;
}

LossReport keycentroid_l1(const DenseField& pred, const KeyCentroidField& target) {
    const int joints = target.valid.channels();
    if (pred.channels() != 2 * joints || pred.height() != target.displacement.height() ||
        pred.width() != target.displacement.width()) {
        throw std::invalid_argument("keycentroid_l1: shape mismatch");
    }
    std::int64_t n = 0;
    for (float v : target.valid.raw()) n += (v != 0.0f);
    if (n == 0) throw std::runtime_error("keycentroid_l1: no valid pixels");

    LossReport report;
    report.num_active = n;
    report.gradient = DenseField(pred.height(), pred.width(), pred.channels());
    double sum = 0.0;
    for (int j = 0; j < joints; ++j) {
        for (int y = 0; y < pred.height(); ++y) {
            for (int x = 0; x < pred.width(); ++x) {
                if (target.valid.at(j, y, x) == 0.0f) continue;
                const double ex = static_cast<double>(pred.at(2 * j, y, x)) -
                                  target.displacement.at(2 * j, y, x);
                const double ey = static_cast<double>(pred.at(2 * j + 1, y, x)) -
                                  target.displacement.at(2 * j + 1, y, x);
                sum += std::abs(ex) + std::abs(ey);
                report.gradient.at(2 * j, y, x) =
                    static_cast<float>(sgn(ex) / static_cast<double>(n));
                report.gradient.at(2 * j + 1, y, x) =
                    static_cast<float>(sgn(ey) / static_cast<double>(n));
            }
        }
    }
    report.value = sum / static_cast<double>(n);
    return report;
}

LossReport offset_l1(const OffsetField& pred, const OffsetField& target) {
    if (!pred.offsets.same_shape(target.offsets)) {
        throw std::invalid_argument("offset_l1: shape mismatch");
    }
    const std::int64_t n = target.foreground.area();
    if (n == 0) throw std::runtime_error("offset_l1: no foreground pixels");

    LossReport report;
    report.num_active = n;
    report.gradient = DenseField(pred.offsets.height(), pred.offsets.width(), 2);
    double sum = 0.0;
    for (int y = 0; y < pred.offsets.height(); ++y) {
        for (int x = 0; x < pred.offsets.width(); ++x) {
            if (!target.foreground.at(y, x)) continue;
            const double ex =
                static_cast<double>(pred.offsets.at(0, y, x)) - target.offsets.at(0, y, x);
            const double ey =
                static_cast<double>(pred.offsets.at(1, y, x)) - target.offsets.at(1, y, x);
            sum += std::abs(ex) + std::abs(ey);
            report.gradient.at(0, y, x) = static_cast<float>(sgn(ex) / static_cast<double>(n));
            report.gradient.at(1, y, x) = static_cast<float>(sgn(ey) / static_cast<double>(n));
        }
    }
    report.value = sum / static_cast<double>(n);
    return report;
}

FiniteDiffResult finite_diff_check(
    const std::function<LossReport(const DenseField&)>& loss, const DenseField& pred,
    double eps, std::uint64_t seed, int min_samples,
    const std::function<bool(int c, int y, int x)>& skip) {
    if (eps < 1e-6 || eps > 1e-3) {
        throw std::invalid_argument("finite_diff_check: eps must be in [1e-6, 1e-3]");
    }
    const LossReport base = loss(pred);
    Rng rng(seed);
    FiniteDiffResult result;
    DenseField work = pred;
    int guard = 0;
    while (result.samples < min_samples && guard < min_samples * 100) {
        ++guard;
        const int c = rng.uniform_int(0, pred.channels() - 1);
        const int y = rng.uniform_int(0, pred.height() - 1);
        const int x = rng.uniform_int(0, pred.width() - 1);
        if (skip && skip(c, y, x)) continue;

        const float original = work.at(c, y, x);
        const float plus = static_cast<float>(original + eps);
        const float minus = static_cast<float>(original - eps);
        work.at(c, y, x) = plus;
        const double lp = loss(work).value;
        work.at(c, y, x) = minus;
        const double lm = loss(work).value;
        work.at(c, y, x) = original;

        // Divide by the perturbation that was actually representable in
        // float32, not the nominal eps.
        const double delta = static_cast<double>(plus) - static_cast<double>(minus);
        const double fd = (lp - lm) / delta;
        const double an = base.gradient.at(c, y, x);
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-12});
        result.max_rel_err = std::max(result.max_rel_err, std::abs(fd - an) / denom);
        ++result.samples;
    }
    return result;
}

}  // namespace kdc
