// Deterministic synthetic scenes: articulated stick figures with capsule
// masks, plus the occlusion operator used by the crowding studies.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kdc/mask.hpp"
#include "kdc/skeleton.hpp"

namespace kdc {

// COCO visibility semantics: 2 = labeled and visible, 1 = labeled but not
// visible (occluded or out of frame).
enum Visibility : int { kNotVisible = 1, kVisible = 2 };

struct Keypoint {
    SubPixel pos;
    int vis = kVisible;
    bool visible() const { return vis == kVisible; }
};

struct PersonGT {
    std::array<Keypoint, kNumJoints> keypoints;
    Mask mask;
    int instance_id = 0;
    // Set by the generator for persons below the trainable-size threshold;
    // consumed by exclusion_mask.
    bool flag_small = false;
};

struct Scene {
    int height = 0;
    int width = 0;
    std::vector<PersonGT> persons;
    int image_id = 0;
    // Largest overlap fraction applied by occlude_scene; 0 for clean scenes.
    double occlusion_fraction = 0.0;
};

struct GenConfig {
    // Persons whose rasterized mask covers fewer pixels than this are
    // flagged small (excluded from loss supervision downstream).
    double small_area_threshold = 220.0;
};

// Deterministic for a fixed seed. Persons are placed on a jittered grid with
// cell-derived scale so that distinct figures never touch; requires
// num_persons >= 1 and canvas >= 64x64.
Scene generate_scene(int num_persons, int height, int width, std::uint64_t seed,
                     const GenConfig& cfg = {});

struct OcclusionResult {
    Scene scene;
    double achieved_overlap = 0.0;  // intersection with front / back area
    bool reached_target = false;
};

// Translates the back person so its mask overlaps the front person's mask by
// at least overlap_fraction (measured against the back person's area).
// Contested pixels stay with the front person; back keypoints whose pixel is
// owned by another instance (or leaves the canvas) are flagged not visible.
// When the target is unreachable the best achieved fraction is reported.
OcclusionResult occlude_scene(const Scene& scene, int front_id, int back_id,
                              double overlap_fraction, std::uint64_t seed);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

void save_scene(const std::string& path, const Scene& scene);
Scene load_scene(const std::string& path);

}  // namespace kdc
