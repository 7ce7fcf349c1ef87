#include "kdc/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace kdc {

EvalConfig EvalConfig::coco_defaults() {
    EvalConfig cfg;
    // COCO per-joint sigmas, doubled (the protocol divides d^2 by
    // 2 * area * (2*sigma)^2).
    const std::array<double, kNumJoints> sigmas = {
        0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
        0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089};
    for (int j = 0; j < kNumJoints; ++j) cfg.kappas[j] = 2.0 * sigmas[j];
    for (int i = 0; i < 10; ++i) cfg.thresholds.push_back(0.50 + 0.05 * i);
    return cfg;
}

double oks(const KeypointDetection& pred, const GtPerson& gt, double area,
           const std::array<double, kNumJoints>& kappas) {
    if (area <= 0.0) throw std::invalid_argument("oks: area must be > 0");
    double sum = 0.0;
    int visible = 0;
    for (int j = 0; j < kNumJoints; ++j) {
        if (gt.vis[j] != kVisible) continue;
        ++visible;
        if (pred.joint_score[j] <= 0.0) continue;  // missed joint contributes 0
        const double dx = pred.x[j] - gt.x[j];
        const double dy = pred.y[j] - gt.y[j];
        const double d2 = dx * dx + dy * dy;
        sum += std::exp(-d2 / (2.0 * area * kappas[j] * kappas[j]));
    }
    if (visible == 0) throw EvalError("oks: ground truth has no visible joints");
    return sum / visible;
}

namespace {

struct FlatGt {
    int image_id;
    int index_in_image;
};

struct FlatDet {
    int image_id;
    int det_index;
    double score;
};

// COCO-style AP at one threshold: per image, detections in descending score
// greedily take the unmatched ground truth with the highest similarity; the
// PR curve is accumulated over the globally score-sorted detection list and
// averaged over the 101-point recall grid.
template <typename SimFn>
double ap_at_threshold(const std::vector<FlatDet>& dets_sorted, std::int64_t n_gt,
                       const std::map<int, std::vector<int>>& gt_by_image, SimFn&& sim,
                       double threshold) {
    if (n_gt == 0) return -1.0;
    std::map<int, std::vector<bool>> gt_matched;
    for (const auto& [img, gts] : gt_by_image) gt_matched[img].assign(gts.size(), false);

    std::vector<bool> tp(dets_sorted.size(), false);
    for (std::size_t k = 0; k < dets_sorted.size(); ++k) {
        const auto& det = dets_sorted[k];
        auto it = gt_by_image.find(det.image_id);
        if (it == gt_by_image.end()) continue;
        auto& matched = gt_matched[det.image_id];
        int best = -1;
        double best_sim = threshold;
        for (std::size_t g = 0; g < it->second.size(); ++g) {
            if (matched[g]) continue;
            const double s = sim(det, it->second[g]);
            if (s >= best_sim && (best < 0 || s > best_sim)) {
                best_sim = s;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0) {
            matched[best] = true;
            tp[k] = true;
        }
    }

    std::vector<double> precision(dets_sorted.size());
    std::vector<double> recall(dets_sorted.size());
    std::int64_t tps = 0, fps = 0;
    for (std::size_t k = 0; k < dets_sorted.size(); ++k) {
        tp[k] ? ++tps : ++fps;
        precision[k] = static_cast<double>(tps) / (tps + fps);
        recall[k] = static_cast<double>(tps) / n_gt;
    }
    // Right-to-left precision envelope, then sample the 101 recall points.
    for (int k = static_cast<int>(precision.size()) - 2; k >= 0; --k) {
        precision[k] = std::max(precision[k], precision[k + 1]);
    }
    double total = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double r = i / 100.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it != recall.end()) total += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    return total / 101.0;
}

struct SplitFilter {
    double min_fraction;  // inclusive
    double max_fraction;  // inclusive
};

template <typename GtValid, typename SimFn, typename DetRange>
ApSummary evaluate(const std::vector<GtImage>& gts, const DetRange& dets, GtValid&& gt_valid,
                   SimFn&& sim, const EvalConfig& cfg) {
    std::int64_t total_gt = 0;
    for (const auto& img : gts) {
        for (std::size_t g = 0; g < img.persons.size(); ++g) {
            total_gt += gt_valid(img.persons[g]);
        }
    }
    if (total_gt == 0) throw EvalError("average_precision: empty ground truth");

    auto run = [&](double lo, double hi) -> std::vector<double> {
        std::map<int, std::vector<int>> gt_by_image;
        std::map<int, double> fraction_by_image;
        std::int64_t n_gt = 0;
        for (const auto& img : gts) {
            if (img.occlusion_fraction < lo || img.occlusion_fraction > hi) continue;
            fraction_by_image[img.image_id] = img.occlusion_fraction;
            auto& list = gt_by_image[img.image_id];
            for (int g = 0; g < static_cast<int>(img.persons.size()); ++g) {
                if (gt_valid(img.persons[g])) {
                    list.push_back(g);
                    ++n_gt;
                }
            }
        }
        std::vector<FlatDet> flat;
        for (int d = 0; d < static_cast<int>(dets.size()); ++d) {
            if (!fraction_by_image.count(dets[d].image_id)) continue;
            flat.push_back({dets[d].image_id, d, dets[d].score});
        }
        std::sort(flat.begin(), flat.end(), [](const FlatDet& a, const FlatDet& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.image_id != b.image_id) return a.image_id < b.image_id;
            return a.det_index < b.det_index;
        });
        std::vector<double> aps;
        for (double t : cfg.thresholds) {
            aps.push_back(ap_at_threshold(
                flat, n_gt, gt_by_image,
                [&](const FlatDet& det, int g) { return sim(dets[det.det_index], det.image_id, g); },
                t));
        }
        return aps;
    };

    auto mean = [](const std::vector<double>& v) -> double {
        if (v.empty()) return -1.0;
        double s = 0.0;
        for (double x : v) s += x;
        return s / v.size();
    };

    ApSummary summary;
    const auto full = run(0.0, 1.0);
    summary.ap = mean(full);
    summary.ap50 = -1.0;
    summary.ap75 = -1.0;
    for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
        if (std::abs(cfg.thresholds[i] - 0.50) < 1e-9) summary.ap50 = full[i];
        if (std::abs(cfg.thresholds[i] - 0.75) < 1e-9) summary.ap75 = full[i];
    }

    auto split_ap = [&](double lo, double hi) -> double {
        try {
            return mean(run(lo, hi));
        } catch (const EvalError&) {
            return -1.0;  // no ground truth in this occlusion bin
        }
    };
    const double e = cfg.easy_max, m = cfg.medium_max;
    summary.ap_easy = split_ap(0.0, std::nexttoward(e, 0.0));
    summary.ap_medium = split_ap(e, m);
    summary.ap_hard = split_ap(std::nexttoward(m, 1.0), 1.0);
    return summary;
}

}  // namespace

ApSummary keypoint_ap(const std::vector<GtImage>& gts,
                      const std::vector<KeypointDetection>& dets, const EvalConfig& cfg) {
    std::map<int, const GtImage*> image_index;
    for (const auto& img : gts) image_index[img.image_id] = &img;
    auto gt_valid = [](const GtPerson& p) {
        for (int v : p.vis) {
            if (v == kVisible) return true;
        }
        return false;
    };
    auto sim = [&](const KeypointDetection& det, int image_id, int g) {
        const GtPerson& person = image_index.at(image_id)->persons[g];
        return oks(det, person, person.area, cfg.kappas);
    };
    return evaluate(gts, dets, gt_valid, sim, cfg);
}

ApSummary mask_ap(const std::vector<GtImage>& gts, const std::vector<MaskDetection>& dets,
                  const EvalConfig& cfg) {
    std::map<int, const GtImage*> image_index;
    for (const auto& img : gts) image_index[img.image_id] = &img;
    auto gt_valid = [](const GtPerson& p) { return !p.mask.empty_mask(); };
    auto sim = [&](const MaskDetection& det, int image_id, int g) {
        return mask_iou(det.mask, image_index.at(image_id)->persons[g].mask);
    };
    return evaluate(gts, dets, gt_valid, sim, cfg);
}

GtImage gt_from_scene(const Scene& scene) {
    GtImage img;
    img.image_id = scene.image_id;
    img.occlusion_fraction = scene.occlusion_fraction;
    for (const auto& person : scene.persons) {
        GtPerson gt;
        for (int j = 0; j < kNumJoints; ++j) {
            gt.x[j] = person.keypoints[j].pos.x;
            gt.y[j] = person.keypoints[j].pos.y;
            gt.vis[j] = person.keypoints[j].vis;
        }
        gt.mask = person.mask;
        gt.area = static_cast<double>(person.mask.area());
        img.persons.push_back(std::move(gt));
    }
    return img;
}

}  // namespace kdc
