#include "kdc/pose_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>

#include "kdc/geometry.hpp"
#include "kdc/smooth.hpp"

namespace kdc {

int PersonPose::joints_present() const {
    int n = 0;
    for (const auto& j : joints) n += j.has_value();
    return n;
}

DenseField pgo_smooth(const DenseField& heatmaps, const Skeleton& skeleton, double sigma_hvk,
                      double sigma_lvk) {
    if (sigma_hvk < 0.1 || sigma_hvk >= 0.5) {
        throw std::invalid_argument("pgo_smooth: sigma_hvk must be in [0.1, 0.5)");
    }
    if (sigma_lvk < 0.5 || sigma_lvk >= 1.0) {
        throw std::invalid_argument("pgo_smooth: sigma_lvk must be in [0.5, 1.0)");
    }
    if (heatmaps.channels() != kNumJoints) {
        throw std::invalid_argument("pgo_smooth: expected one channel per joint");
    }
    std::vector<double> sigmas(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) {
        sigmas[j] = skeleton.variance_class[j] == VarianceClass::kHigh ? sigma_hvk : sigma_lvk;
    }
    return smooth_gaussian(heatmaps, sigmas);
}

namespace {

// Candidates come from plateau components: connected (8-way) regions of
// equal value that dominate every neighbor. Binary disk heatmaps stay flat
// after small-sigma smoothing, so a plain strict local maximum never fires;
// representing each plateau by the pixel nearest its centroid yields one
// stable candidate per disk.
struct ChannelScratch {
    std::vector<std::uint8_t> is_peak;
    std::vector<std::int32_t> frontier;   // BFS work list of flat indices
    std::vector<std::int32_t> component;  // current plateau
    std::vector<std::int32_t> touched;    // qualifying pixels, for cheap resets
};

std::vector<KeypointCandidate> channel_candidates(const DenseField& f, int joint,
                                                  double threshold, double nms_radius,
                                                  ChannelScratch& scratch) {
    const int h = f.height();
    const int w = f.width();
    const float* data = f.channel(joint).data();
    const float thr = static_cast<float>(threshold);

    // Flags: 1 = qualifying peak pixel, 2 = already grouped into a plateau.
    auto& flags = scratch.is_peak;
    flags.assign(static_cast<std::size_t>(h) * w, 0);
    scratch.touched.clear();

    for (int y = 0; y < h; ++y) {
        const float* row = data + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const float v = row[x];
            if (v < thr) continue;
            bool peak = true;
            const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h - 1);
            const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
            for (int ny = y0; ny <= y1 && peak; ++ny) {
                const float* nrow = data + static_cast<std::size_t>(ny) * w;
                for (int nx = x0; nx <= x1; ++nx) {
                    if (nrow[nx] > v) {
                        peak = false;
                        break;
                    }
                }
            }
            if (peak) {
                const std::int32_t idx = y * w + x;
                flags[idx] = 1;
                scratch.touched.push_back(idx);
            }
        }
    }

    // Group equal-valued peak pixels into plateaus and pick representatives.
    std::vector<KeypointCandidate> reps;
    for (std::int32_t start : scratch.touched) {
        if (flags[start] != 1) continue;
        const float level = data[start];
        auto& component = scratch.component;
        auto& frontier = scratch.frontier;
        component.clear();
        frontier.clear();
        frontier.push_back(start);
        flags[start] = 2;
        while (!frontier.empty()) {
            const std::int32_t idx = frontier.back();
            frontier.pop_back();
            component.push_back(idx);
            const int px = idx % w;
            const int py = idx / w;
            const int y0 = std::max(py - 1, 0), y1 = std::min(py + 1, h - 1);
            const int x0 = std::max(px - 1, 0), x1 = std::min(px + 1, w - 1);
            for (int ny = y0; ny <= y1; ++ny) {
                for (int nx = x0; nx <= x1; ++nx) {
                    const std::int32_t nidx = ny * w + nx;
                    if (flags[nidx] != 1 || data[nidx] != level) continue;
                    flags[nidx] = 2;
                    frontier.push_back(nidx);
                }
            }
        }
        double cx = 0.0, cy = 0.0;
        for (std::int32_t idx : component) {
            cx += idx % w;
            cy += idx / w;
        }
        cx /= component.size();
        cy /= component.size();
        GridPoint best{component.front() % w, component.front() / w};
        double best_d = std::numeric_limits<double>::infinity();
        for (std::int32_t idx : component) {
            const GridPoint p{idx % w, idx / w};
            const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
            if (d < best_d || (d == best_d && (p.y < best.y || (p.y == best.y && p.x < best.x)))) {
                best_d = d;
                best = p;
            }
        }
        reps.push_back({joint, best, std::clamp(level, 0.0f, 1.0f)});
    }

    // Greedy NMS in descending score; ties break by (y, x).
    std::sort(reps.begin(), reps.end(), [](const KeypointCandidate& a, const KeypointCandidate& b) {
        if (a.raw_score != b.raw_score) return a.raw_score > b.raw_score;
        if (a.pos.y != b.pos.y) return a.pos.y < b.pos.y;
        return a.pos.x < b.pos.x;
    });
    std::vector<KeypointCandidate> kept;
    const double r2 = nms_radius * nms_radius;
    for (const auto& c : reps) {
        bool suppressed = false;
        for (const auto& k : kept) {
            const double dx = c.pos.x - k.pos.x;
            const double dy = c.pos.y - k.pos.y;
            if (dx * dx + dy * dy <= r2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(c);
    }
    return kept;
}

}  // namespace

std::vector<KeypointCandidate> extract_candidates(const DenseField& heatmaps, double threshold,
                                                  double nms_radius) {
    if (threshold <= 0.0 || threshold >= 1.0) {
        throw std::invalid_argument("extract_candidates: threshold must be in (0,1)");
    }
    if (nms_radius <= 0.0) {
        throw std::invalid_argument("extract_candidates: nms_radius must be > 0");
    }
    std::vector<std::vector<KeypointCandidate>> per_channel(heatmaps.channels());
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        ChannelScratch scratch;
#ifdef _OPENMP
#pragma omp for schedule(dynamic)
#endif
        for (int j = 0; j < heatmaps.channels(); ++j) {
            per_channel[j] = channel_candidates(heatmaps, j, threshold, nms_radius, scratch);
        }
    }
    std::vector<KeypointCandidate> all;
    for (auto& v : per_channel) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end(), [](const KeypointCandidate& a, const KeypointCandidate& b) {
        if (a.raw_score != b.raw_score) return a.raw_score > b.raw_score;
        if (a.joint_id != b.joint_id) return a.joint_id < b.joint_id;
        if (a.pos.y != b.pos.y) return a.pos.y < b.pos.y;
        return a.pos.x < b.pos.x;
    });
    return all;
}

RefinedKeypoint refine_keypoint(const KeypointCandidate& candidate,
                                const DenseField& kc_displacement,
                                const DenseField& smoothed_heatmaps, double radius,
                                double threshold) {
    const int j = candidate.joint_id;
    const int h = smoothed_heatmaps.height();
    const int w = smoothed_heatmaps.width();
    if (candidate.pos.x < 0 || candidate.pos.x >= w || candidate.pos.y < 0 ||
        candidate.pos.y >= h) {
        throw std::invalid_argument("refine_keypoint: candidate out of bounds");
    }

    double wsum = 0.0, sx = 0.0, sy = 0.0, sconf = 0.0;
    int votes = 0;
    const SubPixel center{static_cast<double>(candidate.pos.x),
                          static_cast<double>(candidate.pos.y)};
    for_each_disk_pixel(center, radius, h, w, [&](int x, int y) {
        const double act = smoothed_heatmaps.at(j, y, x);
        if (act < threshold) return;
        const double vx = x + static_cast<double>(kc_displacement.at(2 * j, y, x));
        const double vy = y + static_cast<double>(kc_displacement.at(2 * j + 1, y, x));
        wsum += act;
        sx += act * vx;
        sy += act * vy;
        sconf += act * sample_bilinear(smoothed_heatmaps, j, vx, vy);
        ++votes;
    });

    RefinedKeypoint out;
    out.joint_id = j;
    if (votes == 0) {
        out.pos = center;
        out.confidence = std::clamp(static_cast<double>(candidate.raw_score), 0.0, 1.0);
        out.votes = 1;  // the candidate stands in for itself
        return out;
    }
    double rx = sx / wsum;
    double ry = sy / wsum;
    // Refinement never leaves the candidate's disk.
    const double dx = rx - center.x;
    const double dy = ry - center.y;
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist > radius) {
        const double scale = radius / dist;
        rx = center.x + dx * scale;
        ry = center.y + dy * scale;
    }
    out.pos = {rx, ry};
    out.confidence = std::clamp(sconf / wsum, 0.0, 1.0);
    out.votes = votes;
    return out;
}

std::vector<PersonPose> assemble_poses(const std::vector<RefinedKeypoint>& refined,
                                       const Skeleton& skeleton, const AssembleParams& params) {
    if (params.link_radius <= 0.0) {
        throw std::invalid_argument("assemble_poses: link_radius must be > 0");
    }
    std::vector<int> order(refined.size());
    for (std::size_t i = 0; i < refined.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ka = refined[a];
        const auto& kb = refined[b];
        if (ka.confidence != kb.confidence) return ka.confidence > kb.confidence;
        if (ka.joint_id != kb.joint_id) return ka.joint_id < kb.joint_id;
        if (ka.pos.y != kb.pos.y) return ka.pos.y < kb.pos.y;
        return ka.pos.x < kb.pos.x;
    });

    std::vector<bool> used(refined.size(), false);
    std::vector<PersonPose> poses;
    const double dup2 = params.dup_radius * params.dup_radius;
    const double link2 = params.link_radius * params.link_radius;

    for (int idx : order) {
        if (used[idx]) continue;
        const auto& seed = refined[idx];
        if (seed.confidence < params.min_confidence) continue;

        // A seed inside an already-claimed instance's same-joint disk is a
        // duplicate of that instance, not a new person.
        bool duplicate = false;
        for (const auto& pose : poses) {
            const auto& claimed = pose.joints[seed.joint_id];
            if (!claimed) continue;
            const double dx = seed.pos.x - claimed->pos.x;
            const double dy = seed.pos.y - claimed->pos.y;
            if (dx * dx + dy * dy <= dup2) {
                duplicate = true;
                break;
            }
        }
        used[idx] = true;
        if (duplicate) continue;

        PersonPose pose;
        pose.joints[seed.joint_id] = seed;
        std::queue<int> frontier;
        frontier.push(seed.joint_id);
        while (!frontier.empty()) {
            const int a = frontier.front();
            frontier.pop();
            for (int b : skeleton.adjacency[a]) {
                if (pose.joints[b]) continue;
                const SubPixel anchor = pose.joints[a]->pos;
                int best = -1;
                double best_d2 = 0.0;
                for (std::size_t i = 0; i < refined.size(); ++i) {
                    if (used[i] || refined[i].joint_id != b) continue;
                    const double dx = refined[i].pos.x - anchor.x;
                    const double dy = refined[i].pos.y - anchor.y;
                    const double d2 = dx * dx + dy * dy;
                    if (d2 > link2) continue;
                    if (best < 0 || d2 < best_d2 ||
                        (d2 == best_d2 && refined[i].confidence > refined[best].confidence)) {
                        best_d2 = d2;
                        best = static_cast<int>(i);
                    }
                }
                if (best >= 0) {
                    used[best] = true;
                    pose.joints[b] = refined[best];
                    frontier.push(b);
                }
            }
        }
        double sum = 0.0;
        for (const auto& jkp : pose.joints) {
            if (jkp) sum += jkp->confidence;
        }
        pose.instance_score = sum / pose.joints_present();
        poses.push_back(std::move(pose));
    }
    return poses;
}

}  // namespace kdc
