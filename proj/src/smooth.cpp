#include "kdc/smooth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kdc {

std::vector<double> gaussian_taps(double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_taps: sigma must be > 0");
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> w(r + 1);
    double sum = 0.0;
    for (int k = 0; k <= r; ++k) {
        w[k] = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        sum += (k == 0) ? w[k] : 2.0 * w[k];
    }
    for (double& v : w) v /= sum;
    return w;
}

namespace {

constexpr int kMaxTaps = 64;  // half-kernel cap for the fast path (sigma ~ 21)

void validate(const DenseField& field, std::span<const double> sigmas) {
    if (static_cast<int>(sigmas.size()) != field.channels()) {
        throw std::invalid_argument("smooth_gaussian: sigma count must match channels");
    }
    for (double s : sigmas) {
        if (s <= 0.0) throw std::invalid_argument("smooth_gaussian: sigma must be > 0");
    }
}

struct Kernel {
    std::array<float, kMaxTaps> w;  // normalized half kernel, w[0] center
    int r = 0;
    bool small = false;  // fits the fixed buffer
    std::vector<double> full;  // fallback for very wide kernels
};

Kernel make_kernel(double sigma) {
    Kernel k;
    k.full = gaussian_taps(sigma);
    k.r = static_cast<int>(k.full.size()) - 1;
    k.small = k.r < kMaxTaps;
    if (k.small) {
        for (int i = 0; i <= k.r; ++i) k.w[i] = static_cast<float>(k.full[i]);
    }
    return k;
}

// Horizontal pass over one row. Interior pixels use the pre-normalized taps;
// within r of a border the in-bounds taps are renormalized (zero padding
// without edge darkening).
void blur_row(const float* src, float* dst, int width, const Kernel& k) {
    const int r = k.r;
    auto border = [&](int x) {
        double acc = 0.0, wsum = 0.0;
        for (int t = -r; t <= r; ++t) {
            const int xx = x + t;
            if (xx < 0 || xx >= width) continue;
            const double wk = k.full[std::abs(t)];
            acc += wk * src[xx];
            wsum += wk;
        }
        dst[x] = static_cast<float>(acc / wsum);
    };
    const int lo = std::min(r, width);
    const int hi = std::max(width - r, lo);
    for (int x = 0; x < lo; ++x) border(x);
    if (k.small) {
        // Tap-outer passes keep the inner loops contiguous for SIMD.
        const float w0 = k.w[0];
        float* __restrict__ d = dst;
        for (int x = lo; x < hi; ++x) d[x] = w0 * src[x];
        for (int t = 1; t <= r; ++t) {
            const float wt = k.w[t];
            const float* __restrict__ left = src - t;
            const float* __restrict__ right = src + t;
            for (int x = lo; x < hi; ++x) d[x] += wt * (left[x] + right[x]);
        }
    } else {
        for (int x = lo; x < hi; ++x) {
            double acc = k.full[0] * src[x];
            for (int t = 1; t <= r; ++t) acc += k.full[t] * (src[x - t] + src[x + t]);
            dst[x] = static_cast<float>(acc);
        }
    }
    for (int x = hi; x < width; ++x) border(x);
}

// Vertical pass producing one output row: gather the in-bounds tap rows and
// accumulate along x so the inner loops stay contiguous and vectorizable.
void blur_col_row(const DenseField& src, DenseField& dst, int c, int y, const Kernel& k) {
    const int h = src.height();
    const int width = src.width();
    const float* base = src.channel(c).data();
    float* out = dst.channel(c).data() + static_cast<std::size_t>(y) * width;

    if (k.small) {
        std::array<const float*, 2 * kMaxTaps + 1> rows{};
        std::array<float, 2 * kMaxTaps + 1> wk{};
        int n = 0;
        double wsum = 0.0;
        for (int t = -k.r; t <= k.r; ++t) {
            const int yy = y + t;
            if (yy < 0 || yy >= h) continue;
            rows[n] = base + static_cast<std::size_t>(yy) * width;
            wk[n] = static_cast<float>(k.full[std::abs(t)]);
            wsum += k.full[std::abs(t)];
            ++n;
        }
        if (wsum < 1.0 - 1e-12) {  // border row: renormalize in-bounds taps
            const float inv = static_cast<float>(1.0 / wsum);
            for (int t = 0; t < n; ++t) wk[t] *= inv;
        }
        const float w0 = wk[0];
        const float* __restrict__ r0 = rows[0];
        float* __restrict__ o = out;
        for (int x = 0; x < width; ++x) o[x] = w0 * r0[x];
        for (int t = 1; t < n; ++t) {
            const float wt = wk[t];
            const float* __restrict__ rt = rows[t];
            for (int x = 0; x < width; ++x) o[x] += wt * rt[x];
        }
    } else {
        std::vector<double> acc(width, 0.0);
        double wsum = 0.0;
        for (int t = -k.r; t <= k.r; ++t) {
            const int yy = y + t;
            if (yy < 0 || yy >= h) continue;
            const double w = k.full[std::abs(t)];
            wsum += w;
            const float* row = base + static_cast<std::size_t>(yy) * width;
            for (int x = 0; x < width; ++x) acc[x] += w * row[x];
        }
        const double inv = 1.0 / wsum;
        for (int x = 0; x < width; ++x) out[x] = static_cast<float>(acc[x] * inv);
    }
}

}  // namespace

DenseField smooth_gaussian(const DenseField& field, std::span<const double> sigma_per_channel) {
    validate(field, sigma_per_channel);
    const int h = field.height();
    const int w = field.width();
    const int c = field.channels();

    std::vector<Kernel> kernels(c);
    for (int i = 0; i < c; ++i) kernels[i] = make_kernel(sigma_per_channel[i]);

    DenseField tmp(h, w, c);
    DenseField out(h, w, c);

    // Rows are independent in both passes; (channel, row) pairs are flattened
    // so small channel counts still spread across threads.
    const std::int64_t jobs = static_cast<std::int64_t>(c) * h;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < jobs; ++j) {
        const int ch = static_cast<int>(j / h);
        const int y = static_cast<int>(j % h);
        const float* src = field.channel(ch).data() + static_cast<std::size_t>(y) * w;
        float* dst = tmp.channel(ch).data() + static_cast<std::size_t>(y) * w;
        blur_row(src, dst, w, kernels[ch]);
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < jobs; ++j) {
        const int ch = static_cast<int>(j / h);
        const int y = static_cast<int>(j % h);
        blur_col_row(tmp, out, ch, y, kernels[ch]);
    }
    return out;
}

DenseField smooth_gaussian(const DenseField& field, double sigma) {
    std::vector<double> sigmas(field.channels(), sigma);
    return smooth_gaussian(field, sigmas);
}

namespace ref {

DenseField smooth_gaussian_direct(const DenseField& field,
                                  std::span<const double> sigma_per_channel) {
    validate(field, sigma_per_channel);
    const int h = field.height();
    const int w = field.width();
    DenseField out(h, w, field.channels());
    for (int c = 0; c < field.channels(); ++c) {
        const auto taps = gaussian_taps(sigma_per_channel[c]);
        const int r = static_cast<int>(taps.size()) - 1;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0, wsum = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    const int yy = y + dy;
                    if (yy < 0 || yy >= h) continue;
                    for (int dx = -r; dx <= r; ++dx) {
                        const int xx = x + dx;
                        if (xx < 0 || xx >= w) continue;
                        const double wk = taps[std::abs(dy)] * taps[std::abs(dx)];
                        acc += wk * field.at(c, yy, xx);
                        wsum += wk;
                    }
                }
                out.at(c, y, x) = static_cast<float>(acc / wsum);
            }
        }
    }
    return out;
}

}  // namespace ref

}  // namespace kdc
