#pragma once

#include <array>
#include <string>
#include <vector>

#include "pose/parse_result.hpp"
#include "pose/skeleton.hpp"

namespace pose {

struct Segment {
    Vec2 a; // proximal endpoint
    Vec2 b; // distal endpoint
};

// Both predicted endpoints within fraction * truth length of their matching
// truth endpoints (matched in order, no swapping). Zero-length truth is an
// error.
bool pcp_correct(const Segment& predicted, const Segment& truth, double fraction = 0.5);

// The 10 evaluated segments. Torso runs neck->pelvis and head runs
// head_top->neck, with the pelvis taken as the hip midpoint.
enum class SegmentKind : int { torso = 0, head, upper_leg, lower_leg, upper_arm, lower_arm };
constexpr int kNumSegmentKinds = 6;
constexpr int kNumSegments = 10;

struct NamedSegment {
    Segment seg;
    SegmentKind kind;
};

std::array<NamedSegment, kNumSegments> pose_segments(const std::array<Vec2, kNumJoints>& joints);

struct PosePrediction {
    std::string image_id;
    bool valid = false;
    std::array<Vec2, kNumJoints> joints;
};

// Joint locations (pixel space) read off the joint-level parts of a parse.
PosePrediction prediction_from_parse(const ParseResult& result, const SkeletonTree& tree,
                                     int cell_size, const std::string& image_id);

struct PcpReport {
    struct Row {
        std::string name;
        int correct = 0;
        int total = 0;
        double percent = 0.0;
    };
    std::array<Row, kNumSegmentKinds> rows; // L/R merged
    int correct_total = 0;
    int segments_total = 0;
    double percent_total = 0.0;
};

// Predictions are matched to annotations by image_id; an annotated image
// without a valid prediction counts all its segments incorrect. Truth
// segments with an invisible endpoint joint are not evaluated.
PcpReport evaluate(const std::vector<PosePrediction>& predictions,
                   const std::vector<Annotation>& annotations, double fraction = 0.5);

std::string format_report_table(const PcpReport& report);
std::string report_to_csv(const PcpReport& report);

} // namespace pose
