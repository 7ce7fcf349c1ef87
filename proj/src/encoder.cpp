#include "kdc/encoder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kdc/geometry.hpp"

namespace kdc {

DenseField encode_heatmaps(const Scene& scene, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("encode_heatmaps: radius must be > 0");
    DenseField out(scene.height, scene.width, kNumJoints);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int j = 0; j < kNumJoints; ++j) {
        for (const auto& person : scene.persons) {
            const auto& kp = person.keypoints[j];
            if (!kp.visible()) continue;
            for_each_disk_pixel(kp.pos, radius, scene.height, scene.width,
                                [&](int x, int y) { out.at(j, y, x) = 1.0f; });
        }
    }
    return out;
}

KeyCentroidField encode_keycentroid(const Scene& scene, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("encode_keycentroid: radius must be > 0");
    KeyCentroidField f;
    f.radius = radius;
    f.displacement = DenseField(scene.height, scene.width, 2 * kNumJoints);
    f.valid = DenseField(scene.height, scene.width, kNumJoints);
    f.response = DenseField(scene.height, scene.width, kNumJoints);
    // Response variance is tied to the disk radius: sigma = R/3, which puts
    // the value near 0.011 at the rim and 1 at the keypoint itself.
    const double sigma = radius / 3.0;
    const double inv_two_s2 = 1.0 / (2.0 * sigma * sigma);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int j = 0; j < kNumJoints; ++j) {
        // Track the squared distance of the currently assigned keypoint so
        // overlapping disks of the same joint type resolve to the nearest
        // keypoint; processing in instance order makes ties stick with the
        // lower instance id.
        std::vector<double> best_d2(static_cast<std::size_t>(scene.height) * scene.width,
                                    std::numeric_limits<double>::infinity());
        for (const auto& person : scene.persons) {
            const auto& kp = person.keypoints[j];
            if (!kp.visible()) continue;
            const SubPixel q = kp.pos;
            for_each_disk_pixel(q, radius, scene.height, scene.width, [&](int x, int y) {
                const double dx = q.x - x;
                const double dy = q.y - y;
                const double d2 = dx * dx + dy * dy;
                auto& best = best_d2[static_cast<std::size_t>(y) * scene.width + x];
                if (d2 < best) {
                    best = d2;
                    f.displacement.at(2 * j, y, x) = static_cast<float>(dx);
                    f.displacement.at(2 * j + 1, y, x) = static_cast<float>(dy);
                    f.valid.at(j, y, x) = 1.0f;
                    f.response.at(j, y, x) = static_cast<float>(std::exp(-d2 * inv_two_s2));
                }
            });
        }
    }
    return f;
}

std::pair<OffsetField, MaskCentroidSet> encode_offsets(const Scene& scene, CentroidMode mode,
                                                       double sigma_margin) {
    if (scene.persons.empty()) throw std::invalid_argument("encode_offsets: scene has no persons");
    if (sigma_margin <= 0.0) throw std::invalid_argument("encode_offsets: sigma must be > 0");

    OffsetField field;
    field.offsets = DenseField(scene.height, scene.width, 2);
    field.foreground = Mask(scene.height, scene.width);
    MaskCentroidSet centroids;

    for (const auto& person : scene.persons) {
        if (person.mask.empty_mask()) {
            throw std::runtime_error("encode_offsets: instance " +
                                     std::to_string(person.instance_id) + " has an empty mask");
        }
        const SubPixel mean = person.mask.centroid();
        SubPixel c = mean;
        if (mode == CentroidMode::kDynamic) {
            // Ground-truth proxy for the high-confidence keypoint: the
            // visible keypoint closest to the mask mean. Falls back to the
            // mean itself when nothing is visible.
            double best = std::numeric_limits<double>::infinity();
            for (const auto& kp : person.keypoints) {
                if (!kp.visible()) continue;
                const double dx = kp.pos.x - mean.x;
                const double dy = kp.pos.y - mean.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < best) {
                    best = d2;
                    c = kp.pos;
                }
            }
        }
        // Centroids live on the 1/256 grid: p + v then reconstructs the
        // centroid exactly even through float32 storage.
        c = quantize(c);
        centroids.push_back({person.instance_id, c, sigma_margin, mode});

        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                if (!person.mask.at(y, x)) continue;
                field.foreground.at(y, x) = 1;
                field.offsets.at(0, y, x) = static_cast<float>(c.x - x);
                field.offsets.at(1, y, x) = static_cast<float>(c.y - y);
            }
        }
    }
    return {std::move(field), std::move(centroids)};
}

DenseField exclusion_mask(const Scene& scene) {
    DenseField out(scene.height, scene.width, 1, 1.0f);
    for (const auto& person : scene.persons) {
        if (!person.flag_small) continue;
        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                if (person.mask.at(y, x)) out.at(0, y, x) = 0.0f;
            }
        }
    }
    return out;
}

std::string centroids_to_json(const MaskCentroidSet& set) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : set) {
        arr.push_back({{"instance_id", c.instance_id},
                       {"cx", c.centroid.x},
                       {"cy", c.centroid.y},
                       {"sigma", c.sigma},
                       {"mode", c.mode == CentroidMode::kStatic ? "static" : "dynamic"}});
    }
    return arr.dump(2) + "\n";
}

MaskCentroidSet centroids_from_json(const std::string& text) {
    const auto root = nlohmann::json::parse(text);
    MaskCentroidSet set;
    for (const auto& item : root) {
        MaskCentroid c;
        c.instance_id = item.at("instance_id").get<int>();
        c.centroid = {item.at("cx").get<double>(), item.at("cy").get<double>()};
        c.sigma = item.at("sigma").get<double>();
        c.mode = item.at("mode").get<std::string>() == "static" ? CentroidMode::kStatic
                                                                : CentroidMode::kDynamic;
        set.push_back(c);
    }
    return set;
}

namespace ref {

DenseField encode_heatmaps_direct(const Scene& scene, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("encode_heatmaps: radius must be > 0");
    DenseField out(scene.height, scene.width, kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) {
        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                for (const auto& person : scene.persons) {
                    const auto& kp = person.keypoints[j];
                    if (!kp.visible()) continue;
                    if (disk_contains({x, y}, kp.pos, radius)) {
                        out.at(j, y, x) = 1.0f;
                        break;
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace ref

}  // namespace kdc
