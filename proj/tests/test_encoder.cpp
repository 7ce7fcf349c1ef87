#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "kdc/encoder.hpp"
#include "kdc/geometry.hpp"
#include "kdc/scene.hpp"
#include "test_util.hpp"

using namespace kdc;

namespace {

// A minimal hand-built scene: one person, all joints visible, a rectangular
// mask. Keypoint positions are chosen per test.
Scene single_person_scene(int h, int w, SubPixel everywhere) {
    Scene scene;
    scene.height = h;
    scene.width = w;
    PersonGT person;
    person.instance_id = 0;
    person.mask = Mask(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) person.mask.at(y, x) = 1;
    }
    for (auto& kp : person.keypoints) kp = {quantize(everywhere), kVisible};
    scene.persons.push_back(std::move(person));
    return scene;
}

std::int64_t channel_sum(const DenseField& f, int c) {
    std::int64_t n = 0;
    for (float v : f.channel(c)) n += (v != 0.0f);
    return n;
}

}  // namespace

TEST_CASE("heatmap disk pixel count matches the brute-force oracle") {
    Scene scene = single_person_scene(160, 160, {64.0, 64.0});
    const DenseField hm = encode_heatmaps(scene, 32.0);

    // Oracle: count integer pixels within Euclidean distance 32 of (64,64).
    std::int64_t oracle = 0;
    for (int y = 0; y < 160; ++y) {
        for (int x = 0; x < 160; ++x) {
            if (disk_contains({x, y}, {64.0, 64.0}, 32.0)) ++oracle;
        }
    }
    CHECK(oracle == 3209);
    for (int j = 0; j < kNumJoints; ++j) CHECK(channel_sum(hm, j) == oracle);

    // Values are exactly {0, 1}.
    for (float v : hm.raw()) CHECK((v == 0.0f || v == 1.0f));
}

TEST_CASE("radius one marks at most the 4-neighborhood") {
    Scene scene = single_person_scene(64, 64, {20.0, 20.0});
    const DenseField hm = encode_heatmaps(scene, 1.0);
    CHECK(channel_sum(hm, 0) == 5);  // integer center: cross of five pixels

    Scene off = single_person_scene(64, 64, {20.5, 20.25});
    const DenseField hm2 = encode_heatmaps(off, 1.0);
    CHECK(channel_sum(hm2, 0) <= 5);
    CHECK(channel_sum(hm2, 0) >= 1);
}

TEST_CASE("heatmaps of invisible keypoints are empty") {
    Scene scene = single_person_scene(64, 64, {20.0, 20.0});
    for (auto& kp : scene.persons[0].keypoints) kp.vis = kNotVisible;
    const DenseField hm = encode_heatmaps(scene, 8.0);
    for (float v : hm.raw()) CHECK(v == 0.0f);
}

TEST_CASE("heatmap encoder matches the full-grid reference") {
    const Scene scene = generate_scene(2, 128, 128, 31);
    const DenseField fast = encode_heatmaps(scene, 12.0);
    const DenseField direct = ref::encode_heatmaps_direct(scene, 12.0);
    CHECK(test::max_abs_diff(fast, direct) == 0.0);
}

TEST_CASE("keycentroid stores exact displacements toward the keypoint") {
    Scene scene = single_person_scene(64, 64, {10.0, 10.0});
    const KeyCentroidField kc = encode_keycentroid(scene, 32.0);

    // Pixel under the keypoint: zero displacement, unit response.
    CHECK(kc.displacement.at(0, 10, 10) == 0.0f);
    CHECK(kc.displacement.at(1, 10, 10) == 0.0f);
    CHECK(kc.response.at(0, 10, 10) == 1.0f);
    CHECK(kc.valid.at(0, 10, 10) == 1.0f);

    // k_v = q - p: q=(10,10), p=(3,4) -> (7,6).
    CHECK(kc.displacement.at(0, 4, 3) == 7.0f);
    CHECK(kc.displacement.at(1, 4, 3) == 6.0f);

    // Outside the disk: invalid and zero.
    CHECK(kc.valid.at(0, 60, 60) == 0.0f);
    CHECK(kc.displacement.at(0, 60, 60) == 0.0f);
}

TEST_CASE("keycentroid displacement magnitude never exceeds the radius") {
    const Scene scene = generate_scene(2, 256, 256, 8);
    const double radius = 24.0;
    const KeyCentroidField kc = encode_keycentroid(scene, radius);
    for (int j = 0; j < kNumJoints; ++j) {
        for (int y = 0; y < 256; ++y) {
            for (int x = 0; x < 256; ++x) {
                const double dx = kc.displacement.at(2 * j, y, x);
                const double dy = kc.displacement.at(2 * j + 1, y, x);
                if (kc.valid.at(j, y, x) != 0.0f) {
                    CHECK(dx * dx + dy * dy <= radius * radius + 1e-9);
                } else {
                    CHECK(dx == 0.0f);
                    CHECK(dy == 0.0f);
                }
            }
        }
    }
}

TEST_CASE("overlapping same-joint disks resolve to the nearest keypoint") {
    Scene scene;
    scene.height = 128;
    scene.width = 128;
    for (int i = 0; i < 2; ++i) {
        PersonGT person;
        person.instance_id = i;
        person.mask = Mask(128, 128);
        person.mask.at(60, 50 + 20 * i) = 1;
        for (auto& kp : person.keypoints) kp = {{50.0 + 20.0 * i, 60.0}, kVisible};
        scene.persons.push_back(std::move(person));
    }
    const KeyCentroidField kc = encode_keycentroid(scene, 32.0);

    // Oracle: nearest keypoint wins everywhere in the union of the disks.
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) {
            if (kc.valid.at(14, y, x) == 0.0f) continue;  // right knee channel
            const double da = std::hypot(x - 50.0, y - 60.0);
            const double db = std::hypot(x - 70.0, y - 60.0);
            const double expect_x = (da <= db) ? 50.0 : 70.0;  // tie -> lower id
            CHECK(kc.displacement.at(28, y, x) == doctest::Approx(expect_x - x));
        }
    }
    // Midpoint pixel is a tie: it must point at the lower instance id.
    CHECK(kc.displacement.at(28, 60, 60) == doctest::Approx(-10.0));
}

TEST_CASE("response map attains one at keypoint pixels and decays by R/3 sigma") {
    Scene scene = single_person_scene(160, 160, {80.25, 80.75});
    const double radius = 32.0;
    const KeyCentroidField kc = encode_keycentroid(scene, radius);
    float best = 0.0f;
    for (float v : kc.response.channel(0)) best = std::max(best, v);
    const double sigma = radius / 3.0;
    const double quantization_floor = std::exp(-(0.25 * 0.25 + 0.25 * 0.25) / (2 * sigma * sigma));
    CHECK(best >= quantization_floor);
    CHECK(best <= 1.0f);
    // Near-rim response ~ exp(-4.5): evaluate at the true pixel distance.
    const double rim = kc.response.at(0, 80, 80 + 31);
    const double d2 = std::pow(111 - 80.25, 2) + std::pow(80 - 80.75, 2);
    CHECK(rim == doctest::Approx(std::exp(-d2 / (2 * sigma * sigma))).epsilon(1e-5));
    CHECK(rim < 0.02);
}

TEST_CASE("static offsets reconstruct the centroid exactly at every pixel") {
    const Scene scene = generate_scene(3, 256, 256, 12);
    const auto [field, centroids] = encode_offsets(scene, CentroidMode::kStatic);
    REQUIRE(centroids.size() == 3);

    for (const auto& person : scene.persons) {
        const auto& c = centroids[person.instance_id];
        CHECK(c.mode == CentroidMode::kStatic);
        for (int y = 0; y < 256; ++y) {
            for (int x = 0; x < 256; ++x) {
                if (!person.mask.at(y, x)) continue;
                // m + v == C exactly, in double arithmetic over the stored floats.
                CHECK(static_cast<double>(x) + field.offsets.at(0, y, x) == c.centroid.x);
                CHECK(static_cast<double>(y) + field.offsets.at(1, y, x) == c.centroid.y);
            }
        }
        // The static centroid is the quantized mask pixel mean.
        const SubPixel mean = person.mask.centroid();
        CHECK(std::abs(c.centroid.x - mean.x) <= 0.5 / 256.0);
        CHECK(std::abs(c.centroid.y - mean.y) <= 0.5 / 256.0);
    }
}

TEST_CASE("single-pixel mask yields the pixel itself with zero offsets") {
    Scene scene;
    scene.height = 64;
    scene.width = 64;
    PersonGT person;
    person.instance_id = 0;
    person.mask = Mask(64, 64);
    person.mask.at(5, 5) = 1;
    for (auto& kp : person.keypoints) kp = {{5.0, 5.0}, kVisible};
    scene.persons.push_back(person);
    const auto [field, centroids] = encode_offsets(scene, CentroidMode::kStatic);
    CHECK(centroids[0].centroid.x == 5.0);
    CHECK(centroids[0].centroid.y == 5.0);
    CHECK(field.offsets.at(0, 5, 5) == 0.0f);
    CHECK(field.offsets.at(1, 5, 5) == 0.0f);
}

TEST_CASE("rectangular mask centroid sits at the rectangle center") {
    Scene scene;
    scene.height = 64;
    scene.width = 64;
    PersonGT person;
    person.instance_id = 0;
    person.mask = Mask(64, 64);
    for (int y = 10; y < 30; ++y) {
        for (int x = 20; x < 30; ++x) person.mask.at(y, x) = 1;  // 10 x 20 rectangle
    }
    for (auto& kp : person.keypoints) kp = {{25.0, 20.0}, kVisible};
    scene.persons.push_back(person);
    const auto [field, centroids] = encode_offsets(scene, CentroidMode::kStatic);
    CHECK(centroids[0].centroid.x == doctest::Approx(24.5));
    CHECK(centroids[0].centroid.y == doctest::Approx(19.5));
}

TEST_CASE("L-shaped mask centroid equals the explicit pixel average") {
    Scene scene;
    scene.height = 64;
    scene.width = 64;
    PersonGT person;
    person.instance_id = 0;
    person.mask = Mask(64, 64);
    for (int y = 10; y < 40; ++y) person.mask.at(y, 10) = 1;
    for (int x = 10; x < 40; ++x) person.mask.at(39, x) = 1;
    for (auto& kp : person.keypoints) kp = {{10.0, 10.0}, kVisible};
    scene.persons.push_back(person);

    double sx = 0, sy = 0;
    std::int64_t n = 0;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            if (person.mask.at(y, x)) {
                sx += x;
                sy += y;
                ++n;
            }
        }
    }
    const auto [field, centroids] = encode_offsets(scene, CentroidMode::kStatic);
    CHECK(std::abs(centroids[0].centroid.x - sx / n) <= 0.5 / 256.0);
    CHECK(std::abs(centroids[0].centroid.y - sy / n) <= 0.5 / 256.0);
    // The mean may fall outside the mask; it just has to be inside the box.
    CHECK(centroids[0].centroid.x > 10.0);
    CHECK(centroids[0].centroid.y < 40.0);
}

TEST_CASE("dynamic centroids pick the visible keypoint nearest the mask mean") {
    const Scene scene = generate_scene(2, 256, 256, 44);
    const auto [field, centroids] = encode_offsets(scene, CentroidMode::kDynamic);
    for (const auto& person : scene.persons) {
        const SubPixel mean = person.mask.centroid();
        double best = 1e18;
        SubPixel expect{};
        for (const auto& kp : person.keypoints) {
            if (!kp.visible()) continue;
            const double d = std::hypot(kp.pos.x - mean.x, kp.pos.y - mean.y);
            if (d < best) {
                best = d;
                expect = kp.pos;
            }
        }
        CHECK(centroids[person.instance_id].centroid.x == expect.x);
        CHECK(centroids[person.instance_id].centroid.y == expect.y);
    }
}

TEST_CASE("encode_offsets rejects empty masks") {
    Scene scene;
    scene.height = 64;
    scene.width = 64;
    PersonGT person;
    person.instance_id = 0;
    person.mask = Mask(64, 64);
    scene.persons.push_back(person);
    CHECK_THROWS(encode_offsets(scene, CentroidMode::kStatic));
    scene.persons.clear();
    CHECK_THROWS_AS(encode_offsets(scene, CentroidMode::kStatic), std::invalid_argument);
}

TEST_CASE("exclusion mask follows flagging and ownership") {
    Scene scene = generate_scene(2, 256, 256, 6);
    SUBCASE("no flags means everything trainable") {
        const DenseField ex = exclusion_mask(scene);
        for (float v : ex.raw()) CHECK(v == 1.0f);
    }
    SUBCASE("a flagged person excludes exactly its own pixels") {
        scene.persons[1].flag_small = true;
        const DenseField ex = exclusion_mask(scene);
        for (int y = 0; y < 256; ++y) {
            for (int x = 0; x < 256; ++x) {
                const bool flagged_owner = scene.persons[1].mask.at(y, x) != 0;
                CHECK(ex.at(0, y, x) == (flagged_owner ? 0.0f : 1.0f));
            }
        }
    }
    SUBCASE("ownership decides on overlap: front unflagged pixels stay trainable") {
        // Occlude so the flagged back person slides under the front person.
        auto occ = occlude_scene(scene, 0, 1, 0.5, 6);
        occ.scene.persons[1].flag_small = true;
        const DenseField ex = exclusion_mask(occ.scene);
        for (int y = 0; y < 256; ++y) {
            for (int x = 0; x < 256; ++x) {
                if (occ.scene.persons[0].mask.at(y, x)) CHECK(ex.at(0, y, x) == 1.0f);
                if (occ.scene.persons[1].mask.at(y, x)) CHECK(ex.at(0, y, x) == 0.0f);
            }
        }
    }
}

TEST_CASE("centroid sidecar json round trip") {
    const Scene scene = generate_scene(2, 128, 128, 14);
    const auto [field, centroids] = encode_offsets(scene, CentroidMode::kDynamic, 7.5);
    const MaskCentroidSet back = centroids_from_json(centroids_to_json(centroids));
    REQUIRE(back.size() == centroids.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].instance_id == centroids[i].instance_id);
        CHECK(back[i].centroid.x == centroids[i].centroid.x);
        CHECK(back[i].centroid.y == centroids[i].centroid.y);
        CHECK(back[i].sigma == centroids[i].sigma);
        CHECK((back[i].mode == centroids[i].mode));
    }
}
