#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pose/geometry.hpp"

namespace pose {

// Canonical 14-joint ordering used by annotations and the evaluation metric.
// Loaders for datasets with a different ordering go through a remap table
// (see dataset.hpp).
enum JointName : int {
    kHeadTop = 0,
    kNeck = 1,
    kLeftShoulder = 2,
    kLeftElbow = 3,
    kLeftWrist = 4,
    kRightShoulder = 5,
    kRightElbow = 6,
    kRightWrist = 7,
    kLeftHip = 8,
    kLeftKnee = 9,
    kLeftAnkle = 10,
    kRightHip = 11,
    kRightKnee = 12,
    kRightAnkle = 13,
};
constexpr int kNumJoints = 14;

enum class PartLevel { high, mid, joint };

struct PartDef {
    int part_id = -1;
    PartLevel level = PartLevel::joint;
    BoxSize box; // in feature cells
    std::vector<int> constituent_joints;
    std::string name;
};

struct SkeletonTree {
    std::vector<PartDef> parts;              // indexed by part_id
    std::vector<std::pair<int, int>> edges;  // (parent_id, child_id)
    int root_id = -1;

    int num_parts() const { return static_cast<int>(parts.size()); }
    const PartDef& part(int id) const { return parts[static_cast<size_t>(id)]; }
    std::vector<int> children_of(int part_id) const;
    int parent_of(int part_id) const; // -1 for root
    // parts in parent-before-child order starting at root
    std::vector<int> topological_order() const;

    // Throws Error("invalid_tree", ...) if the edges do not form a tree
    // spanning all parts rooted at root_id, or a part definition is bad.
    void validate() const;
};

// The default 25-node hierarchy: 2 high-level parts, 9 mid-level parts and
// the 14 joints. Joint-level part id = kJointPartBase + joint index.
constexpr int kJointPartBase = 11;
SkeletonTree default_skeleton();

struct JointAnnotation {
    Vec2 pt;
    bool visible = true;
};

struct Annotation {
    std::string image_id;
    std::array<JointAnnotation, kNumJoints> joints;
    double height_px = 0.0; // person height in pixels
};

// Pixel location of every part: joints map to their joint, compositional
// parts to the centroid of their constituent joints. A part with any
// invisible constituent joint is absent.
std::vector<std::optional<Vec2>> derive_part_instances(const Annotation& ann,
                                                       const SkeletonTree& tree);

} // namespace pose
