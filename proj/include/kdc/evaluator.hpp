// Desk-scale metrics: OKS keypoint similarity, COCO-protocol average
// precision with 101-point interpolation, and mask IoU, with easy/medium/
// hard occlusion splits.
#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "kdc/mask.hpp"
#include "kdc/pose_decoder.hpp"
#include "kdc/scene.hpp"

namespace kdc {

// Raised for unevaluable inputs (e.g. empty ground truth); the CLI maps it
// to exit code 3.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalConfig {
    // Per-joint OKS constants kappa_j; the COCO protocol uses twice the
    // published per-joint sigmas, i.e. oks = exp(-d^2 / (2 * area * kappa^2))
    // with kappa = 2 * sigma_coco.
    std::array<double, kNumJoints> kappas;
    std::vector<double> thresholds;  // strictly increasing, in (0,1)
    // Occlusion splits: easy < 0.3, medium in [0.3, 0.6], hard > 0.6.
    double easy_max = 0.3;
    double medium_max = 0.6;

    static EvalConfig coco_defaults();
};

struct GtPerson {
    std::array<double, kNumJoints> x{};
    std::array<double, kNumJoints> y{};
    std::array<int, kNumJoints> vis{};  // 0 = missing, 1 = occluded, 2 = visible
    Mask mask;
    double area = 0.0;
};

struct GtImage {
    int image_id = 0;
    double occlusion_fraction = 0.0;
    std::vector<GtPerson> persons;
};

struct KeypointDetection {
    int image_id = 0;
    std::array<double, kNumJoints> x{};
    std::array<double, kNumJoints> y{};
    std::array<double, kNumJoints> joint_score{};
    double score = 0.0;
};

struct MaskDetection {
    int image_id = 0;
    Mask mask;
    double score = 0.0;
};

// Mean over visible GT joints of exp(-d^2 / (2 * area * kappa_j^2)).
// Predictions with joint_score 0 count as missed (zero similarity term).
// area must be positive; instances without visible joints are skipped by
// the AP pipeline before this is called.
double oks(const KeypointDetection& pred, const GtPerson& gt, double area,
           const std::array<double, kNumJoints>& kappas);

struct ApSummary {
    double ap = 0.0;    // mean over the threshold grid
    double ap50 = 0.0;  // threshold 0.50
    double ap75 = 0.0;  // threshold 0.75
    double ap_easy = -1.0;
    double ap_medium = -1.0;
    double ap_hard = -1.0;  // -1 when the split holds no ground truth
};

ApSummary keypoint_ap(const std::vector<GtImage>& gts,
                      const std::vector<KeypointDetection>& dets, const EvalConfig& cfg);

ApSummary mask_ap(const std::vector<GtImage>& gts, const std::vector<MaskDetection>& dets,
                  const EvalConfig& cfg);

GtImage gt_from_scene(const Scene& scene);

}  // namespace kdc
