// Heatmap + KeyCentroid decoding: point-wise Gaussian smoothing, plateau-
// aware peak extraction with greedy NMS, sub-pixel vote refinement, and
// greedy kinematic assembly into person instances.
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "kdc/encoder.hpp"
#include "kdc/field.hpp"
#include "kdc/skeleton.hpp"

namespace kdc {

struct KeypointCandidate {
    int joint_id = 0;
    GridPoint pos;
    float raw_score = 0.0f;  // clamped to [0,1]
};

struct RefinedKeypoint {
    int joint_id = 0;
    SubPixel pos;
    double confidence = 0.0;  // [0,1]
    int votes = 0;
};

struct PersonPose {
    std::array<std::optional<RefinedKeypoint>, kNumJoints> joints;
    double instance_score = 0.0;  // mean confidence of present joints

    int joints_present() const;
};

// Per-joint Gaussian smoothing with the variance-class sigma. Requires
// 0.1 <= sigma_hvk < 0.5 and 0.5 <= sigma_lvk < 1.
DenseField pgo_smooth(const DenseField& heatmaps, const Skeleton& skeleton,
                      double sigma_hvk = 0.3, double sigma_lvk = 0.7);

// Local maxima at or above `threshold`, one candidate per plateau (binary
// disk heatmaps produce flat maxima; the representative is the plateau pixel
// nearest its centroid). Greedy NMS keeps candidates in descending score,
// suppressing anything within nms_radius of a kept one; score ties break by
// (y, x). Output is sorted by score descending.
std::vector<KeypointCandidate> extract_candidates(const DenseField& heatmaps, double threshold,
                                                  double nms_radius = 10.0);

// Every pixel p in the radius-R disk around the candidate with activation
// >= threshold votes for p + k_v(p); the refined position is the
// activation-weighted vote mean (clamped to within R of the candidate) and
// the confidence is the activation-weighted mean of the smoothed heatmap
// bilinearly sampled at the vote positions, clamped to [0,1]. With zero
// votes the candidate falls back to its own position and raw score.
RefinedKeypoint refine_keypoint(const KeypointCandidate& candidate,
                                const DenseField& kc_displacement,
                                const DenseField& smoothed_heatmaps, double radius,
                                double threshold);

struct AssembleParams {
    double link_radius = 64.0;    // default 2R
    double dup_radius = 32.0;     // same-joint duplicate suppression, default R
    double min_confidence = 0.5;  // seeding threshold
};

// Greedy assembly: pop the highest-confidence unused keypoint, seed a new
// instance, walk the skeleton breadth-first attaching the nearest unused
// keypoint of each adjacent joint type within link_radius. A seed falling
// inside an already-claimed instance's same-joint disk is suppressed.
std::vector<PersonPose> assemble_poses(const std::vector<RefinedKeypoint>& refined,
                                       const Skeleton& skeleton, const AssembleParams& params);

}  // namespace kdc
