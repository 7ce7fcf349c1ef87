// Embedding-space instance clustering: static Gaussian membership, the
// seeded dynamic centroid iteration, instance-wise Gaussian smoothing, mask
// finalization, and pose/mask unification.
#pragma once

#include <optional>
#include <vector>

#include "kdc/encoder.hpp"
#include "kdc/field.hpp"
#include "kdc/mask.hpp"
#include "kdc/pose_decoder.hpp"

namespace kdc {

struct MembershipMap {
    DenseField prob;  // one channel per instance, values in [0,1]
    Mask foreground;
    std::vector<int> instance_ids;

    int instances() const { return prob.channels(); }
};

// e = m + v at foreground pixels; background stays zero.
DenseField embed_pixels(const OffsetField& offsets);

// phi_j(e) = exp(-|e - C_j|^2 / (2 sigma_j^2)) per instance per foreground
// pixel.
MembershipMap membership_static(const DenseField& embeddings, const Mask& foreground,
                                const MaskCentroidSet& centroids);

struct DynamicResult {
    MembershipMap map;
    std::vector<SubPixel> centroids;
    int iterations = 0;
    bool converged = false;
};

// Alternates (a) assigning each foreground pixel to the argmax-phi instance
// when that phi exceeds 0.5 and (b) recomputing each centroid as the mean
// embedding of its assigned set. Empty clusters keep their previous
// centroid. Stops when every centroid moves less than tol or after
// max_iters; non-convergence is reported, not fatal.
DynamicResult membership_dynamic(const DenseField& embeddings, const Mask& foreground,
                                 const std::vector<SubPixel>& seeds, double sigma,
                                 int max_iters = 20, double tol = 1e-3);

// Per-instance Gaussian smoothing of the probability maps, re-clamped to
// [0,1]. Requires 0.1 <= sigma <= 1.
MembershipMap igo_smooth(const MembershipMap& membership, double sigma);

// A pixel joins the argmax-phi instance iff that maximum exceeds 0.5
// (strict); ties break toward the lower instance id. Output masks are
// pairwise disjoint.
std::vector<Mask> finalize_masks(const MembershipMap& membership);

struct InstanceResult {
    std::optional<PersonPose> pose;
    std::optional<Mask> mask;
    int membership_channel = -1;  // -1 when the instance has no mask
};

// Pairs each pose with the mask whose centroid is nearest the pose's
// highest-confidence joint, greedily by distance, one-to-one. Unmatched
// poses and masks are emitted with the missing half absent.
std::vector<InstanceResult> pose_seg_unify(const std::vector<PersonPose>& poses,
                                           const std::vector<Mask>& masks,
                                           const MembershipMap& membership);

namespace ref {

// Straightforward serial membership evaluation; benchmark baseline.
MembershipMap membership_static_direct(const DenseField& embeddings, const Mask& foreground,
                                       const MaskCentroidSet& centroids);

}  // namespace ref

}  // namespace kdc
