// Ground-truth target encoders: binary disk heatmaps, KeyCentroid
// displacement fields with their Gaussian response maps, embedding offset
// fields, instance centroids, and the loss exclusion mask.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kdc/field.hpp"
#include "kdc/mask.hpp"
#include "kdc/scene.hpp"

namespace kdc {

struct KeyCentroidField {
    // Two channels per joint: dx at 2*j, dy at 2*j+1, both zero outside the
    // valid region. Displacement magnitude never exceeds the disk radius.
    DenseField displacement;
    // One channel per joint, 1 where the pixel lies in some keypoint disk.
    DenseField valid;
    // Gaussian response exp(-d^2 / (2*(R/3)^2)) toward the assigned keypoint;
    // ~0.011 at the disk rim, 1 at the keypoint pixel.
    DenseField response;
    double radius = 0.0;
};

enum class CentroidMode { kStatic, kDynamic };

struct MaskCentroid {
    int instance_id = 0;
    SubPixel centroid;  // 1/256-quantized
    double sigma = 5.0;
    CentroidMode mode = CentroidMode::kStatic;
};
using MaskCentroidSet = std::vector<MaskCentroid>;

struct OffsetField {
    DenseField offsets;  // 2 channels (vx, vy); zero on background
    Mask foreground;     // union of instance masks
};

// 17-channel {0,1} field; channel j is 1 exactly on the union of radius-R
// disks around the visible instances of joint j.
DenseField encode_heatmaps(const Scene& scene, double radius);

// Displacements q - p inside each disk. Where disks of the same joint type
// overlap, the pixel is assigned to the nearest keypoint (ties toward the
// lower instance id), which keeps displacement magnitudes within R.
KeyCentroidField encode_keycentroid(const Scene& scene, double radius);

// Static mode: centroid = mask pixel mean. Dynamic mode: centroid = the
// visible keypoint closest to the mask pixel mean. Offsets satisfy
// m + v == C exactly at every foreground pixel (centroids are quantized to
// the 1/256 grid to make the float32 storage exact).
std::pair<OffsetField, MaskCentroidSet> encode_offsets(const Scene& scene, CentroidMode mode,
                                                       double sigma_margin = 5.0);

// 1 where pixels may contribute to losses; pixels owned by persons flagged
// small are zeroed. Overlap pixels follow mask ownership.
DenseField exclusion_mask(const Scene& scene);

std::string centroids_to_json(const MaskCentroidSet& set);
MaskCentroidSet centroids_from_json(const std::string& text);

namespace ref {

// Brute-force heatmap encoder: full-grid disk membership test per joint.
DenseField encode_heatmaps_direct(const Scene& scene, double radius);

}  // namespace ref

}  // namespace kdc
