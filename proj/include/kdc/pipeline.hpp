// End-to-end wiring: scene -> encoded fields -> decoded instances, noise
// injection for robustness studies, and the run configuration shared with
// the CLI.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kdc/encoder.hpp"
#include "kdc/evaluator.hpp"
#include "kdc/pose_decoder.hpp"
#include "kdc/rng.hpp"
#include "kdc/scene.hpp"
#include "kdc/seg_decoder.hpp"

namespace kdc {

struct DecodeParams {
    double radius = 32.0;
    double sigma_hvk = 0.3;
    double sigma_lvk = 0.7;
    double threshold = 0.5;
    double nms_radius = 10.0;
    double sigma_instance = 5.0;
    double sigma_igo = 0.1;
    // Negative values resolve to the radius-derived defaults 2R and R.
    double link_radius = -1.0;
    double dup_radius = -1.0;
    CentroidMode mode = CentroidMode::kDynamic;
    // A further dynamic seed is accepted only when its membership basin
    // covers at least this many foreground embeddings no earlier seed
    // reaches; keeps merged-pose seeds from splitting a single cluster.
    std::int64_t min_seed_captures = 200;

    double effective_link_radius() const { return link_radius > 0 ? link_radius : 2 * radius; }
    double effective_dup_radius() const { return dup_radius > 0 ? dup_radius : radius; }
};

struct EncodedFields {
    DenseField heatmaps;
    KeyCentroidField keycentroid;
    OffsetField offsets;
    MaskCentroidSet centroids;
    DenseField exclusion;
};

EncodedFields encode_scene(const Scene& scene, double radius, CentroidMode mode,
                           double sigma_instance = 5.0);

struct DecodeResult {
    std::vector<PersonPose> poses;
    std::vector<Mask> masks;
    std::vector<InstanceResult> instances;
    MembershipMap membership;
    std::vector<SubPixel> seeds;  // dynamic mode only
};

// Full decode (pose + segmentation). In static mode `static_centroids` must
// be non-null; in dynamic mode the seeds are pose joints chosen greedily by
// basin coverage of the foreground embeddings (see min_seed_captures), so a
// pose merged across occluded persons can still seed every distinct
// embedding cluster.
DecodeResult decode_fields(const DenseField& heatmaps, const DenseField& kc_displacement,
                           const OffsetField& offsets, const MaskCentroidSet* static_centroids,
                           const DecodeParams& params);

// Additive i.i.d. Gaussian noise on every value; deterministic for a seed.
void add_field_noise(DenseField& field, double sigma, Rng& rng);

// Results serialization (COCO-style results arrays).
std::string poses_to_json(const std::vector<PersonPose>& poses, int image_id);
std::vector<KeypointDetection> keypoint_detections_from_json(const std::string& text);

std::string masks_to_json(const DecodeResult& result, int image_id);
std::vector<MaskDetection> mask_detections_from_json(const std::string& text);

std::string instances_to_json(const DecodeResult& result, int image_id);

}  // namespace kdc
