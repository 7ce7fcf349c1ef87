#include "kdc/skeleton.hpp"

#include <algorithm>
#include <queue>

namespace kdc {

bool Skeleton::is_tree() const {
    if (edges.size() != kNumJoints - 1) return false;
    std::array<bool, kNumJoints> seen{};
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int reached = 0;
    while (!q.empty()) {
        const int j = q.front();
        q.pop();
        ++reached;
        for (int n : adjacency[j]) {
            if (!seen[n]) {
                seen[n] = true;
                q.push(n);
            }
        }
    }
    return reached == kNumJoints;
}

const Skeleton& coco_skeleton() {
    static const Skeleton skeleton = [] {
        Skeleton s;
        s.joint_names = {"nose",           "left_eye",      "right_eye",    "left_ear",
                         "right_ear",      "left_shoulder", "right_shoulder", "left_elbow",
                         "right_elbow",    "left_wrist",    "right_wrist",  "left_hip",
                         "right_hip",      "left_knee",     "right_knee",   "left_ankle",
                         "right_ankle"};
        // Spanning tree: face fans out from the nose, arms hang off the
        // shoulders, legs off the hips, torso sides tie shoulders to hips.
        s.edges = {{kNose, kLeftEye},          {kNose, kRightEye},
                   {kLeftEye, kLeftEar},       {kRightEye, kRightEar},
                   {kNose, kLeftShoulder},     {kNose, kRightShoulder},
                   {kLeftShoulder, kLeftElbow}, {kLeftElbow, kLeftWrist},
                   {kRightShoulder, kRightElbow}, {kRightElbow, kRightWrist},
                   {kLeftShoulder, kLeftHip},  {kRightShoulder, kRightHip},
                   {kLeftHip, kLeftKnee},      {kLeftKnee, kLeftAnkle},
                   {kRightHip, kRightKnee},    {kRightKnee, kRightAnkle}};
        for (auto& vc : s.variance_class) vc = VarianceClass::kLow;
        for (int j : {kLeftWrist, kRightWrist, kLeftAnkle, kRightAnkle, kLeftElbow,
                      kRightElbow, kLeftKnee, kRightKnee}) {
            s.variance_class[j] = VarianceClass::kHigh;
        }
        for (auto [a, b] : s.edges) {
            s.adjacency[a].push_back(b);
            s.adjacency[b].push_back(a);
        }
        for (auto& adj : s.adjacency) std::sort(adj.begin(), adj.end());
        return s;
    }();
    return skeleton;
}

}  // namespace kdc
