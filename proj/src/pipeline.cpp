#include "kdc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace kdc {

EncodedFields encode_scene(const Scene& scene, double radius, CentroidMode mode,
                           double sigma_instance) {
    EncodedFields out;
    out.heatmaps = encode_heatmaps(scene, radius);
    out.keycentroid = encode_keycentroid(scene, radius);
    auto [offsets, centroids] = encode_offsets(scene, mode, sigma_instance);
    out.offsets = std::move(offsets);
    out.centroids = std::move(centroids);
    out.exclusion = exclusion_mask(scene);
    return out;
}

namespace {

// Dynamic centroid seed for one pose: among the present joints (highest
// confidence first) pick the one whose 0.5-membership basin captures the
// most foreground embeddings. The basin radius is sigma*sqrt(2 ln 2); a
// high-confidence joint far from the embedding mass would strand the
// cluster, so capture count decides and confidence only breaks ties.
// Dynamic centroid seeds: every present joint of every pose is a candidate
// attraction center. Each candidate first slides onto the nearby mass of
// still-uncovered embeddings (a short mean-shift with a 2x-basin reach: a
// merged pose's joints sit between the true keypoints, not on them), then
// candidates are taken greedily by how many uncovered embeddings their
// 0.5-membership basin captures; a further seed must bring at least min_new
// newly covered embeddings. Stragglers of an already covered cluster
// average back to its center where the basin holds nothing uncovered, so
// this never splits a single cluster.
std::vector<SubPixel> select_seeds(const std::vector<PersonPose>& poses,
                                   const std::vector<std::pair<float, float>>& fg_emb,
                                   double sigma, std::int64_t min_new) {
    const double basin = sigma * std::sqrt(2.0 * std::log(2.0));
    const double basin2 = basin * basin;
    const double reach2 = 4.0 * basin2;

    struct Candidate {
        double conf;
        int pose;
        int joint;
        SubPixel pos;
    };
    std::vector<Candidate> candidates;
    for (int p = 0; p < static_cast<int>(poses.size()); ++p) {
        for (int j = 0; j < kNumJoints; ++j) {
            if (poses[p].joints[j]) {
                candidates.push_back({poses[p].joints[j]->confidence, p, j,
                                      poses[p].joints[j]->pos});
            }
        }
    }

    std::vector<std::uint8_t> covered(fg_emb.size(), 0);

    auto settle = [&](SubPixel p) {
        for (int iter = 0; iter < 3; ++iter) {
            double sx = 0.0, sy = 0.0;
            std::int64_t n = 0;
            for (std::size_t i = 0; i < fg_emb.size(); ++i) {
                if (covered[i]) continue;
                const double dx = fg_emb[i].first - p.x;
                const double dy = fg_emb[i].second - p.y;
                if (dx * dx + dy * dy < reach2) {
                    sx += fg_emb[i].first;
                    sy += fg_emb[i].second;
                    ++n;
                }
            }
            if (n == 0) break;
            p = {sx / n, sy / n};
        }
        return p;
    };
    auto fresh_captures = [&](SubPixel p) {
        std::int64_t fresh = 0;
        for (std::size_t i = 0; i < fg_emb.size(); ++i) {
            if (covered[i]) continue;
            const double dx = fg_emb[i].first - p.x;
            const double dy = fg_emb[i].second - p.y;
            if (dx * dx + dy * dy < basin2) ++fresh;
        }
        return fresh;
    };

    std::vector<SubPixel> seeds;
    while (!candidates.empty()) {
        std::int64_t best_new = -1;
        std::size_t best_idx = 0;
        SubPixel best_pos{};
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const SubPixel settled = settle(candidates[c].pos);
            const std::int64_t fresh = fresh_captures(settled);
            const auto& cc = candidates[c];
            const auto& bb = candidates[best_idx];
            if (fresh > best_new ||
                (fresh == best_new &&
                 (cc.conf > bb.conf || (cc.conf == bb.conf && (cc.pose < bb.pose ||
                  (cc.pose == bb.pose && cc.joint < bb.joint)))))) {
                best_new = fresh;
                best_idx = c;
                best_pos = settled;
            }
        }
        // The first seed is always taken; further seeds must open up a
        // genuinely new cluster.
        if (!seeds.empty() && best_new < min_new) break;
        seeds.push_back(best_pos);
        for (std::size_t i = 0; i < fg_emb.size(); ++i) {
            if (covered[i]) continue;
            const double dx = fg_emb[i].first - best_pos.x;
            const double dy = fg_emb[i].second - best_pos.y;
            if (dx * dx + dy * dy < basin2) covered[i] = 1;
        }
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best_idx));
    }
    return seeds;
}

}  // namespace

DecodeResult decode_fields(const DenseField& heatmaps, const DenseField& kc_displacement,
                           const OffsetField& offsets, const MaskCentroidSet* static_centroids,
                           const DecodeParams& params) {
    const Skeleton& skeleton = coco_skeleton();
    DecodeResult result;

    // Pose branch: smooth, extract, refine, assemble.
    const DenseField smoothed =
        pgo_smooth(heatmaps, skeleton, params.sigma_hvk, params.sigma_lvk);
    const auto candidates = extract_candidates(smoothed, params.threshold, params.nms_radius);

    std::vector<RefinedKeypoint> refined(candidates.size());
    const std::int64_t n_cand = static_cast<std::int64_t>(candidates.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < n_cand; ++i) {
        refined[i] = refine_keypoint(candidates[i], kc_displacement, smoothed, params.radius,
                                     params.threshold);
    }
    AssembleParams ap;
    ap.link_radius = params.effective_link_radius();
    ap.dup_radius = params.effective_dup_radius();
    ap.min_confidence = params.threshold;
    result.poses = assemble_poses(refined, skeleton, ap);

    // Segmentation branch.
    const DenseField embeddings = embed_pixels(offsets);
    MembershipMap membership;
    if (params.mode == CentroidMode::kStatic) {
        if (static_centroids == nullptr || static_centroids->empty()) {
            throw std::invalid_argument("decode_fields: static mode requires centroids");
        }
        MaskCentroidSet set = *static_centroids;
        for (auto& c : set) c.sigma = params.sigma_instance;
        membership = membership_static(embeddings, offsets.foreground, set);
    } else {
        std::vector<std::pair<float, float>> fg_emb;
        for (int y = 0; y < offsets.foreground.height; ++y) {
            for (int x = 0; x < offsets.foreground.width; ++x) {
                if (offsets.foreground.at(y, x)) {
                    fg_emb.emplace_back(embeddings.at(0, y, x), embeddings.at(1, y, x));
                }
            }
        }
        result.seeds = select_seeds(result.poses, fg_emb, params.sigma_instance,
                                    params.min_seed_captures);
        if (!result.seeds.empty()) {
            auto dyn = membership_dynamic(embeddings, offsets.foreground, result.seeds,
                                          params.sigma_instance);
            membership = std::move(dyn.map);
        }
    }
    if (membership.instances() > 0) {
        membership = igo_smooth(membership, params.sigma_igo);
        result.masks = finalize_masks(membership);
    }
    result.instances = pose_seg_unify(result.poses, result.masks, membership);
    result.membership = std::move(membership);
    return result;
}

void add_field_noise(DenseField& field, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    for (float& v : field.raw()) v = static_cast<float>(v + rng.normal(0.0, sigma));
}

std::string poses_to_json(const std::vector<PersonPose>& poses, int image_id) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& pose : poses) {
        nlohmann::ordered_json det;
        det["image_id"] = image_id;
        det["category_id"] = 1;
        nlohmann::ordered_json kps = nlohmann::ordered_json::array();
        for (const auto& j : pose.joints) {
            if (j) {
                kps.push_back(j->pos.x);
                kps.push_back(j->pos.y);
                kps.push_back(j->confidence);
            } else {
                kps.push_back(0.0);
                kps.push_back(0.0);
                kps.push_back(0.0);
            }
        }
        det["keypoints"] = std::move(kps);
        det["score"] = pose.instance_score;
        arr.push_back(std::move(det));
    }
    return arr.dump(2) + "\n";
}

std::vector<KeypointDetection> keypoint_detections_from_json(const std::string& text) {
    const auto root = nlohmann::json::parse(text);
    std::vector<KeypointDetection> dets;
    for (const auto& item : root) {
        KeypointDetection det;
        det.image_id = item.at("image_id").get<int>();
        det.score = item.at("score").get<double>();
        const auto& kps = item.at("keypoints");
        if (kps.size() != 3 * kNumJoints) {
            throw std::runtime_error("keypoint results: bad keypoints length");
        }
        for (int j = 0; j < kNumJoints; ++j) {
            det.x[j] = kps[3 * j].get<double>();
            det.y[j] = kps[3 * j + 1].get<double>();
            det.joint_score[j] = kps[3 * j + 2].get<double>();
        }
        dets.push_back(det);
    }
    return dets;
}

namespace {

double mask_score(const InstanceResult& inst, const MembershipMap& membership) {
    if (inst.pose) return inst.pose->instance_score;
    // Unpaired mask: fall back to its mean membership probability.
    if (!inst.mask || inst.membership_channel < 0) return 0.0;
    double sum = 0.0;
    std::int64_t n = 0;
    for (int y = 0; y < inst.mask->height; ++y) {
        for (int x = 0; x < inst.mask->width; ++x) {
            if (!inst.mask->at(y, x)) continue;
            sum += membership.prob.at(inst.membership_channel, y, x);
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / n;
}

}  // namespace

std::string masks_to_json(const DecodeResult& result, int image_id) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& inst : result.instances) {
        if (!inst.mask) continue;
        nlohmann::ordered_json det;
        det["image_id"] = image_id;
        det["category_id"] = 1;
        det["segmentation"] = {{"size", {inst.mask->height, inst.mask->width}},
                               {"counts", rle_encode(*inst.mask)}};
        det["score"] = mask_score(inst, result.membership);
        arr.push_back(std::move(det));
    }
    return arr.dump(2) + "\n";
}

std::vector<MaskDetection> mask_detections_from_json(const std::string& text) {
    const auto root = nlohmann::json::parse(text);
    std::vector<MaskDetection> dets;
    for (const auto& item : root) {
        MaskDetection det;
        det.image_id = item.at("image_id").get<int>();
        det.score = item.at("score").get<double>();
        const auto& seg = item.at("segmentation");
        det.mask = rle_decode(seg.at("counts").get<std::vector<std::int64_t>>(),
                              seg.at("size")[0].get<int>(), seg.at("size")[1].get<int>());
        dets.push_back(std::move(det));
    }
    return dets;
}

std::string instances_to_json(const DecodeResult& result, int image_id) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& inst : result.instances) {
        nlohmann::ordered_json item;
        item["image_id"] = image_id;
        if (inst.pose) {
            nlohmann::ordered_json kps = nlohmann::ordered_json::array();
            for (const auto& j : inst.pose->joints) {
                if (j) {
                    kps.push_back(j->pos.x);
                    kps.push_back(j->pos.y);
                    kps.push_back(j->confidence);
                } else {
                    kps.push_back(0.0);
                    kps.push_back(0.0);
                    kps.push_back(0.0);
                }
            }
            item["keypoints"] = std::move(kps);
            item["pose_score"] = inst.pose->instance_score;
        }
        if (inst.mask) {
            item["segmentation"] = {{"size", {inst.mask->height, inst.mask->width}},
                                    {"counts", rle_encode(*inst.mask)}};
        }
        item["score"] = mask_score(inst, result.membership);
        arr.push_back(std::move(item));
    }
    return arr.dump(2) + "\n";
}

}  // namespace kdc
