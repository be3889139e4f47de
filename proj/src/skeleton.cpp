#include "pose/skeleton.hpp"

#include <algorithm>

#include "pose/error.hpp"

namespace pose {

std::vector<int> SkeletonTree::children_of(int part_id) const {
    std::vector<int> out;
    for (const auto& [p, c] : edges)
        if (p == part_id) out.push_back(c);
    return out;
}

int SkeletonTree::parent_of(int part_id) const {
    for (const auto& [p, c] : edges)
        if (c == part_id) return p;
    return -1;
}

std::vector<int> SkeletonTree::topological_order() const {
    std::vector<int> order;
    order.reserve(parts.size());
    std::vector<int> stack{root_id};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        order.push_back(id);
        auto kids = children_of(id);
        // push in reverse so children come out in edge order
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return order;
}

void SkeletonTree::validate() const {
    const int n = num_parts();
    if (n == 0) fail("invalid_tree", "empty skeleton");
    if (root_id < 0 || root_id >= n) fail("invalid_tree", "root id out of range");
    if (static_cast<int>(edges.size()) != n - 1)
        fail("invalid_tree", "edge count must be parts-1");
    for (int i = 0; i < n; ++i) {
        const PartDef& p = parts[static_cast<size_t>(i)];
        if (p.part_id != i) fail("invalid_tree", "part ids must be dense 0..n-1");
        if (p.box.w < 1 || p.box.h < 1) fail("invalid_tree", "box size must be >= 1x1");
        if (p.level == PartLevel::joint && p.constituent_joints.size() != 1)
            fail("invalid_tree", "joint part must have exactly one constituent joint");
        for (int j : p.constituent_joints)
            if (j < 0 || j >= kNumJoints) fail("invalid_tree", "constituent joint out of range");
    }
    std::vector<int> indegree(static_cast<size_t>(n), 0);
    for (const auto& [p, c] : edges) {
        if (p < 0 || p >= n || c < 0 || c >= n) fail("invalid_tree", "edge endpoint out of range");
        ++indegree[static_cast<size_t>(c)];
    }
    if (indegree[static_cast<size_t>(root_id)] != 0) fail("invalid_tree", "root has a parent");
    for (int i = 0; i < n; ++i)
        if (i != root_id && indegree[static_cast<size_t>(i)] != 1)
            fail("invalid_tree", "every non-root part needs exactly one parent");
    if (static_cast<int>(topological_order().size()) != n)
        fail("invalid_tree", "edges do not connect all parts");
}

namespace {

PartDef make_part(int id, PartLevel level, BoxSize box, std::vector<int> joints,
                  std::string name) {
    PartDef p;
    p.part_id = id;
    p.level = level;
    p.box = box;
    p.constituent_joints = std::move(joints);
    p.name = std::move(name);
    return p;
}

} // namespace

SkeletonTree default_skeleton() {
    // Box sizes assume ~150 px person height on a 4 px cell grid.
    const BoxSize high{9, 12};
    const BoxSize mid{6, 9};
    const BoxSize joint{5, 5};

    SkeletonTree t;
    t.parts = {
        make_part(0, PartLevel::high, high,
                  {kNeck, kLeftShoulder, kRightShoulder, kLeftHip, kRightHip}, "upper_body"),
        make_part(1, PartLevel::high, high, {kLeftHip, kRightHip, kLeftKnee, kRightKnee},
                  "lower_body"),
        make_part(2, PartLevel::mid, mid, {kHeadTop, kNeck}, "head"),
        make_part(3, PartLevel::mid, mid, {kLeftShoulder, kLeftElbow}, "upper_arm_l"),
        make_part(4, PartLevel::mid, mid, {kRightShoulder, kRightElbow}, "upper_arm_r"),
        make_part(5, PartLevel::mid, mid, {kLeftElbow, kLeftWrist}, "lower_arm_l"),
        make_part(6, PartLevel::mid, mid, {kRightElbow, kRightWrist}, "lower_arm_r"),
        make_part(7, PartLevel::mid, mid, {kLeftHip, kLeftKnee}, "upper_leg_l"),
        make_part(8, PartLevel::mid, mid, {kRightHip, kRightKnee}, "upper_leg_r"),
        make_part(9, PartLevel::mid, mid, {kLeftKnee, kLeftAnkle}, "lower_leg_l"),
        make_part(10, PartLevel::mid, mid, {kRightKnee, kRightAnkle}, "lower_leg_r"),
    };
    static const char* joint_names[kNumJoints] = {
        "head_top", "neck",       "shoulder_l", "elbow_l", "wrist_l", "shoulder_r", "elbow_r",
        "wrist_r",  "hip_l",      "knee_l",     "ankle_l", "hip_r",   "knee_r",     "ankle_r"};
    for (int j = 0; j < kNumJoints; ++j)
        t.parts.push_back(
            make_part(kJointPartBase + j, PartLevel::joint, joint, {j}, joint_names[j]));

    t.root_id = 0; // upper body is the hub of the hierarchy
    t.edges = {
        {0, 2},  {0, 3},  {0, 4},  {0, 1},
        {2, kJointPartBase + kHeadTop}, {2, kJointPartBase + kNeck},
        {3, kJointPartBase + kLeftShoulder}, {3, kJointPartBase + kLeftElbow}, {3, 5},
        {4, kJointPartBase + kRightShoulder}, {4, kJointPartBase + kRightElbow}, {4, 6},
        {5, kJointPartBase + kLeftWrist},
        {6, kJointPartBase + kRightWrist},
        {1, 7},  {1, 8},
        {7, kJointPartBase + kLeftHip}, {7, kJointPartBase + kLeftKnee}, {7, 9},
        {8, kJointPartBase + kRightHip}, {8, kJointPartBase + kRightKnee}, {8, 10},
        {9, kJointPartBase + kLeftAnkle},
        {10, kJointPartBase + kRightAnkle},
    };
    t.validate();
    return t;
}

std::vector<std::optional<Vec2>> derive_part_instances(const Annotation& ann,
                                                       const SkeletonTree& tree) {
    std::vector<std::optional<Vec2>> out(static_cast<size_t>(tree.num_parts()));
    for (const PartDef& part : tree.parts) {
        Vec2 sum;
        bool ok = !part.constituent_joints.empty();
        for (int j : part.constituent_joints) {
            const JointAnnotation& ja = ann.joints[static_cast<size_t>(j)];
            if (!ja.visible) {
                ok = false;
                break;
            }
            sum += ja.pt;
        }
        if (ok)
            out[static_cast<size_t>(part.part_id)] =
                sum * (1.0 / static_cast<double>(part.constituent_joints.size()));
    }
    return out;
}

} // namespace pose
