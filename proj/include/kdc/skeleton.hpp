// The 17-joint COCO skeleton: names, kinematic tree, and variance classes.
#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace kdc {

inline constexpr int kNumJoints = 17;

enum class VarianceClass { kHigh, kLow };

enum JointId : int {
    kNose = 0,
    kLeftEye = 1,
    kRightEye = 2,
    kLeftEar = 3,
    kRightEar = 4,
    kLeftShoulder = 5,
    kRightShoulder = 6,
    kLeftElbow = 7,
    kRightElbow = 8,
    kLeftWrist = 9,
    kRightWrist = 10,
    kLeftHip = 11,
    kRightHip = 12,
    kLeftKnee = 13,
    kRightKnee = 14,
    kLeftAnkle = 15,
    kRightAnkle = 16,
};

struct Skeleton {
    std::array<std::string, kNumJoints> joint_names;
    // 16 edges forming a spanning tree over the 17 joints.
    std::vector<std::pair<int, int>> edges;
    // Wrists, ankles, elbows and knees are high-variance; nose, eyes, ears,
    // shoulders and hips are low-variance.
    std::array<VarianceClass, kNumJoints> variance_class;

    // Neighbor lists derived from edges, sorted by joint id.
    std::array<std::vector<int>, kNumJoints> adjacency;

    bool is_tree() const;
};

const Skeleton& coco_skeleton();

}  // namespace kdc
