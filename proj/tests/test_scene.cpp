#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "kdc/mask.hpp"
#include "kdc/scene.hpp"
#include "kdc/skeleton.hpp"

using namespace kdc;

TEST_CASE("coco skeleton is a spanning tree with the right variance classes") {
    const Skeleton& s = coco_skeleton();
    CHECK(s.edges.size() == 16);
    CHECK(s.is_tree());
    for (int j : {kLeftWrist, kRightWrist, kLeftAnkle, kRightAnkle, kLeftElbow, kRightElbow,
                  kLeftKnee, kRightKnee}) {
        CHECK(s.variance_class[j] == VarianceClass::kHigh);
    }
    for (int j : {kNose, kLeftEye, kRightEye, kLeftEar, kRightEar, kLeftShoulder,
                  kRightShoulder, kLeftHip, kRightHip}) {
        CHECK(s.variance_class[j] == VarianceClass::kLow);
    }
}

TEST_CASE("generation is deterministic for a fixed seed") {
    const Scene a = generate_scene(1, 128, 128, 7);
    const Scene b = generate_scene(1, 128, 128, 7);
    REQUIRE(a.persons.size() == b.persons.size());
    CHECK(scene_to_json(a) == scene_to_json(b));
    const Scene c = generate_scene(1, 128, 128, 8);
    CHECK(scene_to_json(a) != scene_to_json(c));
}

TEST_CASE("masks are single 4-connected components") {
    const Scene scene = generate_scene(3, 256, 256, 1);
    REQUIRE(scene.persons.size() == 3);
    for (const auto& person : scene.persons) {
        CHECK(person.mask.area() > 0);
        CHECK(person.mask.is_connected4());
    }
}

TEST_CASE("every visible keypoint lies inside its own mask and the canvas") {
    for (std::uint64_t seed : {5ull, 17ull, 23ull}) {
        const Scene scene = generate_scene(2, 128, 128, seed);
        for (const auto& person : scene.persons) {
            for (const auto& kp : person.keypoints) {
                if (!kp.visible()) continue;
                const int px = static_cast<int>(std::lround(kp.pos.x));
                const int py = static_cast<int>(std::lround(kp.pos.y));
                REQUIRE(person.mask.in_bounds(px, py));
                CHECK(person.mask.at(py, px) == 1);
            }
        }
    }
}

TEST_CASE("instance masks partition the foreground") {
    const Scene scene = generate_scene(4, 401, 401, 3);
    Mask seen(scene.height, scene.width);
    for (const auto& person : scene.persons) {
        CHECK(intersection_area(seen, person.mask) == 0);
        for (std::size_t i = 0; i < seen.data.size(); ++i) seen.data[i] |= person.mask.data[i];
    }
}

TEST_CASE("generation rejects invalid arguments") {
    CHECK_THROWS_AS(generate_scene(0, 128, 128, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_scene(1, 32, 128, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_scene(1, 128, 63, 1), std::invalid_argument);
}

TEST_CASE("occlusion at fraction zero leaves masks disjoint") {
    const Scene scene = generate_scene(2, 256, 256, 9);
    const auto occ = occlude_scene(scene, 0, 1, 0.0, 9);
    CHECK(occ.achieved_overlap == 0.0);
    CHECK(occ.reached_target);
    CHECK(intersection_area(occ.scene.persons[0].mask, occ.scene.persons[1].mask) == 0);
}

TEST_CASE("occlusion reaches the seventy percent scenario") {
    const Scene scene = generate_scene(2, 401, 401, 21);
    const auto occ = occlude_scene(scene, 0, 1, 0.7, 21);
    CHECK(occ.achieved_overlap >= 0.7);
    CHECK(occ.reached_target);
    // Ownership: the union has no pixel with two owners.
    CHECK(intersection_area(occ.scene.persons[0].mask, occ.scene.persons[1].mask) == 0);
    // The front person's mask is untouched.
    CHECK(occ.scene.persons[0].mask.data == scene.persons[0].mask.data);
    // Covered back keypoints are flagged not visible.
    int hidden = 0;
    for (const auto& kp : occ.scene.persons[1].keypoints) hidden += !kp.visible();
    CHECK(hidden > 0);
}

TEST_CASE("occluded back keypoints follow the ownership rule") {
    const Scene scene = generate_scene(2, 401, 401, 33);
    const auto occ = occlude_scene(scene, 0, 1, 0.5, 33);
    const auto& front = occ.scene.persons[0];
    const auto& back = occ.scene.persons[1];
    for (const auto& kp : back.keypoints) {
        const int px = static_cast<int>(std::lround(kp.pos.x));
        const int py = static_cast<int>(std::lround(kp.pos.y));
        const bool in_canvas = front.mask.in_bounds(px, py);
        const bool covered = in_canvas && front.mask.at(py, px) != 0;
        CHECK(kp.visible() == (in_canvas && !covered));
    }
}

TEST_CASE("visible keypoints are non-increasing in the overlap fraction") {
    const Scene scene = generate_scene(2, 401, 401, 41);
    int previous = kNumJoints + 1;
    for (double f : {0.0, 0.2, 0.4, 0.6, 0.8}) {
        const auto occ = occlude_scene(scene, 0, 1, f, 41);
        int visible = 0;
        for (const auto& kp : occ.scene.persons[1].keypoints) visible += kp.visible();
        CHECK(visible <= previous);
        previous = visible;
    }
}

TEST_CASE("unreachable overlap reports the best achieved fraction") {
    const Scene scene = generate_scene(2, 256, 256, 2);
    const auto occ = occlude_scene(scene, 0, 1, 1.0, 2);
    // Shapes differ, so a perfect overlap is impossible.
    CHECK(occ.achieved_overlap < 1.0);
    CHECK(occ.achieved_overlap > 0.3);
    CHECK_FALSE(occ.reached_target);
}

TEST_CASE("occlude_scene validates ids") {
    const Scene scene = generate_scene(2, 128, 128, 2);
    CHECK_THROWS_AS(occlude_scene(scene, 0, 9, 0.5, 2), std::invalid_argument);
    CHECK_THROWS_AS(occlude_scene(scene, 0, 0, 0.5, 2), std::invalid_argument);
    CHECK_THROWS_AS(occlude_scene(scene, 0, 1, 1.5, 2), std::invalid_argument);
}

TEST_CASE("small-person flagging follows the area threshold") {
    GenConfig strict;
    strict.small_area_threshold = 1e9;  // everything is small
    const Scene all_small = generate_scene(2, 256, 256, 5, strict);
    for (const auto& p : all_small.persons) CHECK(p.flag_small);

    const Scene normal = generate_scene(2, 256, 256, 5);
    for (const auto& p : normal.persons) CHECK_FALSE(p.flag_small);
}

TEST_CASE("RLE round trip") {
    const Scene scene = generate_scene(2, 128, 128, 13);
    for (const auto& person : scene.persons) {
        const auto counts = rle_encode(person.mask);
        const Mask back = rle_decode(counts, person.mask.height, person.mask.width);
        CHECK(back.data == person.mask.data);
    }
    // Counts start with the zero run even when the first pixel is set.
    Mask m(2, 2);
    m.at(0, 0) = 1;
    const auto counts = rle_encode(m);
    REQUIRE(counts.size() >= 2);
    CHECK(counts[0] == 0);
    CHECK(counts[1] == 1);
}

TEST_CASE("scene json round trip preserves everything") {
    Scene scene = generate_scene(3, 256, 256, 19);
    scene.image_id = 42;
    const auto occ = occlude_scene(scene, 0, 1, 0.4, 19);
    const Scene back = scene_from_json(scene_to_json(occ.scene));
    CHECK(back.image_id == 42);
    CHECK(back.height == occ.scene.height);
    CHECK(back.occlusion_fraction == occ.scene.occlusion_fraction);
    REQUIRE(back.persons.size() == occ.scene.persons.size());
    for (std::size_t i = 0; i < back.persons.size(); ++i) {
        CHECK(back.persons[i].instance_id == occ.scene.persons[i].instance_id);
        CHECK(back.persons[i].mask.data == occ.scene.persons[i].mask.data);
        for (int j = 0; j < kNumJoints; ++j) {
            CHECK(back.persons[i].keypoints[j].pos.x == occ.scene.persons[i].keypoints[j].pos.x);
            CHECK(back.persons[i].keypoints[j].pos.y == occ.scene.persons[i].keypoints[j].pos.y);
            CHECK(back.persons[i].keypoints[j].vis == occ.scene.persons[i].keypoints[j].vis);
        }
    }
}

TEST_CASE("keypoints land on the quantization grid") {
    const Scene scene = generate_scene(2, 256, 256, 4);
    for (const auto& person : scene.persons) {
        for (const auto& kp : person.keypoints) {
            CHECK(kp.pos.x * 256.0 == std::round(kp.pos.x * 256.0));
            CHECK(kp.pos.y * 256.0 == std::round(kp.pos.y * 256.0));
        }
    }
}
