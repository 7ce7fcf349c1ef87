// Deterministic image writers: PGM (P5) for scalar fields, PPM (P6) with a
// fixed palette for instance overlays.
#pragma once

#include <string>
#include <vector>

#include "kdc/field.hpp"
#include "kdc/mask.hpp"
#include "kdc/scene.hpp"

namespace kdc {

// Min-max normalized grayscale render of one channel; a constant channel
// renders black.
void write_field_pgm(const std::string& path, const DenseField& field, int channel);

// Instance masks in distinct palette colors over black, keypoints as white
// 3x3 crosses.
void write_overlay_ppm(const std::string& path, int height, int width,
                       const std::vector<Mask>& masks,
                       const std::vector<std::vector<SubPixel>>& keypoints);

void write_scene_ppm(const std::string& path, const Scene& scene);

}  // namespace kdc
