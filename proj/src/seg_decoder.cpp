#include "kdc/seg_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kdc/smooth.hpp"

namespace kdc {

DenseField embed_pixels(const OffsetField& offsets) {
    if (offsets.offsets.channels() != 2) {
        throw std::invalid_argument("embed_pixels: offsets must have two channels");
    }
    if (offsets.foreground.height != offsets.offsets.height() ||
        offsets.foreground.width != offsets.offsets.width()) {
        throw std::invalid_argument("embed_pixels: foreground shape mismatch");
    }
    const int h = offsets.offsets.height();
    const int w = offsets.offsets.width();
    DenseField out(h, w, 2);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!offsets.foreground.at(y, x)) continue;
            out.at(0, y, x) = static_cast<float>(x) + offsets.offsets.at(0, y, x);
            out.at(1, y, x) = static_cast<float>(y) + offsets.offsets.at(1, y, x);
        }
    }
    return out;
}

namespace {

void fill_membership(MembershipMap& map, const DenseField& embeddings,
                     const std::vector<SubPixel>& centers, const std::vector<double>& sigmas,
                     bool parallel) {
    const int h = embeddings.height();
    const int w = embeddings.width();
    const int n = static_cast<int>(centers.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (int i = 0; i < n; ++i) {
        const double inv = 1.0 / (2.0 * sigmas[i] * sigmas[i]);
        const SubPixel c = centers[i];
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!map.foreground.at(y, x)) continue;
                const double dx = embeddings.at(0, y, x) - c.x;
                const double dy = embeddings.at(1, y, x) - c.y;
                map.prob.at(i, y, x) = static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv));
            }
        }
    }
}

}  // namespace

MembershipMap membership_static(const DenseField& embeddings, const Mask& foreground,
                                const MaskCentroidSet& centroids) {
    if (centroids.empty()) throw std::invalid_argument("membership_static: no centroids");
    for (const auto& c : centroids) {
        if (c.sigma <= 0.0) throw std::invalid_argument("membership_static: sigma must be > 0");
    }
    MembershipMap map;
    map.prob = DenseField(embeddings.height(), embeddings.width(),
                          static_cast<int>(centroids.size()));
    map.foreground = foreground;
    std::vector<SubPixel> centers;
    std::vector<double> sigmas;
    for (const auto& c : centroids) {
        map.instance_ids.push_back(c.instance_id);
        centers.push_back(c.centroid);
        sigmas.push_back(c.sigma);
    }
    fill_membership(map, embeddings, centers, sigmas, /*parallel=*/true);
    return map;
}

DynamicResult membership_dynamic(const DenseField& embeddings, const Mask& foreground,
                                 const std::vector<SubPixel>& seeds, double sigma, int max_iters,
                                 double tol) {
    if (seeds.empty()) throw std::invalid_argument("membership_dynamic: seeds must be nonempty");
    if (sigma <= 0.0) throw std::invalid_argument("membership_dynamic: sigma must be > 0");
    if (max_iters < 1) throw std::invalid_argument("membership_dynamic: max_iters must be >= 1");
    if (tol <= 0.0) throw std::invalid_argument("membership_dynamic: tol must be > 0");

    const int h = embeddings.height();
    const int w = embeddings.width();
    const int n = static_cast<int>(seeds.size());
    const double inv = 1.0 / (2.0 * sigma * sigma);

    std::vector<GridPoint> fg_pixels;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (foreground.at(y, x)) fg_pixels.push_back({x, y});
        }
    }

    std::vector<SubPixel> centroids = seeds;
    std::vector<int> assignment(fg_pixels.size(), -1);

    DynamicResult result;
    result.converged = false;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        // (a) assign each pixel to the argmax-phi instance when phi > 0.5
        const std::int64_t m = static_cast<std::int64_t>(fg_pixels.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t p = 0; p < m; ++p) {
            const double ex = embeddings.at(0, fg_pixels[p].y, fg_pixels[p].x);
            const double ey = embeddings.at(1, fg_pixels[p].y, fg_pixels[p].x);
            int best = -1;
            double best_phi = 0.5;  // strictly greater than 0.5 required
            for (int i = 0; i < n; ++i) {
                const double dx = ex - centroids[i].x;
                const double dy = ey - centroids[i].y;
                const double phi = std::exp(-(dx * dx + dy * dy) * inv);
                if (phi > best_phi) {
                    best_phi = phi;
                    best = i;
                }
            }
            assignment[p] = best;
        }

        // (b) recompute centroids as mean assigned embeddings; empty clusters
        // keep their previous centroid. Serial per-instance accumulation in
        // pixel order keeps the update bitwise deterministic.
        double max_move = 0.0;
        for (int i = 0; i < n; ++i) {
            double sx = 0.0, sy = 0.0;
            std::int64_t count = 0;
            for (std::size_t p = 0; p < fg_pixels.size(); ++p) {
                if (assignment[p] != i) continue;
                sx += embeddings.at(0, fg_pixels[p].y, fg_pixels[p].x);
                sy += embeddings.at(1, fg_pixels[p].y, fg_pixels[p].x);
                ++count;
            }
            if (count == 0) continue;
            const SubPixel next{sx / count, sy / count};
            const double move = std::hypot(next.x - centroids[i].x, next.y - centroids[i].y);
            max_move = std::max(max_move, move);
            centroids[i] = next;
        }
        if (max_move < tol) {
            result.converged = true;
            ++iter;
            break;
        }
    }

    result.iterations = iter;
    result.centroids = centroids;
    result.map.prob = DenseField(h, w, n);
    result.map.foreground = foreground;
    for (int i = 0; i < n; ++i) result.map.instance_ids.push_back(i);
    std::vector<double> sigmas(n, sigma);
    fill_membership(result.map, embeddings, centroids, sigmas, /*parallel=*/true);
    return result;
}

MembershipMap igo_smooth(const MembershipMap& membership, double sigma) {
    if (sigma < 0.1 || sigma > 1.0) {
        throw std::invalid_argument("igo_smooth: sigma must be in [0.1, 1]");
    }
    MembershipMap out;
    out.prob = smooth_gaussian(membership.prob, sigma);
    out.foreground = membership.foreground;
    out.instance_ids = membership.instance_ids;
    for (float& v : out.prob.raw()) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

std::vector<Mask> finalize_masks(const MembershipMap& membership) {
    const int h = membership.prob.height();
    const int w = membership.prob.width();
    const int n = membership.instances();
    std::vector<Mask> masks(n, Mask(h, w));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!membership.foreground.at(y, x)) continue;
            int best = -1;
            float best_phi = 0.5f;  // strict: exactly 0.5 stays unassigned
            for (int i = 0; i < n; ++i) {
                const float phi = membership.prob.at(i, y, x);
                if (phi > best_phi) {
                    best_phi = phi;
                    best = i;
                }
            }
            if (best >= 0) masks[best].at(y, x) = 1;
        }
    }
    return masks;
}

std::vector<InstanceResult> pose_seg_unify(const std::vector<PersonPose>& poses,
                                           const std::vector<Mask>& masks,
                                           const MembershipMap& membership) {
    (void)membership;  // masks index into its channels; nothing else is read
    struct Pair {
        double dist;
        int pose;
        int mask;
    };
    std::vector<SubPixel> anchors(poses.size());
    for (std::size_t p = 0; p < poses.size(); ++p) {
        double best_conf = -1.0;
        for (const auto& j : poses[p].joints) {
            if (j && j->confidence > best_conf) {
                best_conf = j->confidence;
                anchors[p] = j->pos;
            }
        }
    }
    std::vector<std::optional<SubPixel>> mask_centers(masks.size());
    for (std::size_t m = 0; m < masks.size(); ++m) {
        if (!masks[m].empty_mask()) mask_centers[m] = masks[m].centroid();
    }

    std::vector<Pair> pairs;
    for (std::size_t p = 0; p < poses.size(); ++p) {
        for (std::size_t m = 0; m < masks.size(); ++m) {
            if (!mask_centers[m]) continue;
            const double dx = anchors[p].x - mask_centers[m]->x;
            const double dy = anchors[p].y - mask_centers[m]->y;
            pairs.push_back({dx * dx + dy * dy, static_cast<int>(p), static_cast<int>(m)});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.pose != b.pose) return a.pose < b.pose;
        return a.mask < b.mask;
    });

    std::vector<bool> pose_used(poses.size(), false);
    std::vector<bool> mask_used(masks.size(), false);
    std::vector<InstanceResult> results;
    for (const auto& pr : pairs) {
        if (pose_used[pr.pose] || mask_used[pr.mask]) continue;
        pose_used[pr.pose] = true;
        mask_used[pr.mask] = true;
        results.push_back({poses[pr.pose], masks[pr.mask], pr.mask});
    }
    for (std::size_t p = 0; p < poses.size(); ++p) {
        if (!pose_used[p]) results.push_back({poses[p], std::nullopt, -1});
    }
    for (std::size_t m = 0; m < masks.size(); ++m) {
        if (!mask_used[m] && mask_centers[m]) {
            results.push_back({std::nullopt, masks[m], static_cast<int>(m)});
        }
    }
    return results;
}

namespace ref {

MembershipMap membership_static_direct(const DenseField& embeddings, const Mask& foreground,
                                       const MaskCentroidSet& centroids) {
    if (centroids.empty()) throw std::invalid_argument("membership_static: no centroids");
    MembershipMap map;
    map.prob = DenseField(embeddings.height(), embeddings.width(),
                          static_cast<int>(centroids.size()));
    map.foreground = foreground;
    std::vector<SubPixel> centers;
    std::vector<double> sigmas;
    for (const auto& c : centroids) {
        map.instance_ids.push_back(c.instance_id);
        centers.push_back(c.centroid);
        sigmas.push_back(c.sigma);
    }
    fill_membership(map, embeddings, centers, sigmas, /*parallel=*/false);
    return map;
}

}  // namespace ref

}  // namespace kdc
