// Compares the OpenMP kernels against their serial reference
// implementations: correctness deltas plus wall-time medians. Run with
// --iters N for stable numbers; ctest invokes a 2-iteration smoke run.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kdc/encoder.hpp"
#include "kdc/pipeline.hpp"
#include "kdc/seg_decoder.hpp"
#include "kdc/smooth.hpp"

using namespace kdc;
using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double median_ms(int iters, Fn&& fn) {
    std::vector<double> times;
    for (int i = 0; i < iters + 1; ++i) {  // one warmup
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        if (i > 0) times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

double max_delta(const DenseField& a, const DenseField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.raw()[i]) - b.raw()[i]));
    }
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    int iters = 9;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::strcmp(argv[i], "--iters") == 0) iters = std::atoi(argv[i + 1]);
    }
#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    std::printf("kernel benchmark: %d iters, %d threads\n", iters, threads);

    const Scene scene = generate_scene(3, 401, 401, 7);
    const auto fields = encode_scene(scene, 32.0, CentroidMode::kStatic);
    const std::vector<double> sigmas(fields.heatmaps.channels(), 0.7);

    // Gaussian smoothing: separable OpenMP kernel vs direct 2D reference.
    const DenseField smooth_ref = ref::smooth_gaussian_direct(fields.heatmaps, sigmas);
    const DenseField smooth_omp = smooth_gaussian(fields.heatmaps, sigmas);
    const double smooth_err = max_delta(smooth_ref, smooth_omp);

    const double t_smooth_ref =
        median_ms(iters, [&] { ref::smooth_gaussian_direct(fields.heatmaps, sigmas); });
    const double t_smooth_omp =
        median_ms(iters, [&] { smooth_gaussian(fields.heatmaps, sigmas); });

    // Heatmap encoding: disk rasterizer vs full-grid membership test.
    const DenseField enc_ref = ref::encode_heatmaps_direct(scene, 32.0);
    const DenseField enc_omp = encode_heatmaps(scene, 32.0);
    const double enc_err = max_delta(enc_ref, enc_omp);
    const double t_enc_ref = median_ms(iters, [&] { ref::encode_heatmaps_direct(scene, 32.0); });
    const double t_enc_omp = median_ms(iters, [&] { encode_heatmaps(scene, 32.0); });

    // Membership evaluation: parallel vs serial.
    const DenseField emb = embed_pixels(fields.offsets);
    const MembershipMap mem_ref =
        ref::membership_static_direct(emb, fields.offsets.foreground, fields.centroids);
    const MembershipMap mem_omp =
        membership_static(emb, fields.offsets.foreground, fields.centroids);
    const double mem_err = max_delta(mem_ref.prob, mem_omp.prob);
    const double t_mem_ref = median_ms(
        iters, [&] { ref::membership_static_direct(emb, fields.offsets.foreground, fields.centroids); });
    const double t_mem_omp =
        median_ms(iters, [&] { membership_static(emb, fields.offsets.foreground, fields.centroids); });

    std::printf("%-18s %12s %12s %10s %12s\n", "kernel", "serial ms", "omp ms", "speedup",
                "max delta");
    auto row = [](const char* name, double ts, double to, double err) {
        std::printf("%-18s %12.2f %12.2f %9.2fx %12.3g\n", name, ts, to, ts / std::max(to, 1e-9),
                    err);
    };
    row("smooth_gaussian", t_smooth_ref, t_smooth_omp, smooth_err);
    row("encode_heatmaps", t_enc_ref, t_enc_omp, enc_err);
    row("membership", t_mem_ref, t_mem_omp, mem_err);

    // Correctness gates: parallel kernels must agree with the references.
    if (smooth_err > 1e-5 || enc_err != 0.0 || mem_err != 0.0) {
        std::printf("FAIL: kernel outputs diverge from the serial references\n");
        return 1;
    }
    std::printf("OK\n");
    return 0;
}
