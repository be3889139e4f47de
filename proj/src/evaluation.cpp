#include "pose/evaluation.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "pose/error.hpp"

namespace pose {

bool pcp_correct(const Segment& predicted, const Segment& truth, double fraction) {
    const double len = distance(truth.a, truth.b);
    if (!(len > 0.0)) fail("zero_length_segment", "ground truth segment has zero length");
    return distance(predicted.a, truth.a) <= fraction * len &&
           distance(predicted.b, truth.b) <= fraction * len;
}

std::array<NamedSegment, kNumSegments> pose_segments(const std::array<Vec2, kNumJoints>& j) {
    const Vec2 pelvis = (j[kLeftHip] + j[kRightHip]) * 0.5;
    return {{
        {{j[kNeck], pelvis}, SegmentKind::torso},
        {{j[kHeadTop], j[kNeck]}, SegmentKind::head},
        {{j[kLeftHip], j[kLeftKnee]}, SegmentKind::upper_leg},
        {{j[kRightHip], j[kRightKnee]}, SegmentKind::upper_leg},
        {{j[kLeftKnee], j[kLeftAnkle]}, SegmentKind::lower_leg},
        {{j[kRightKnee], j[kRightAnkle]}, SegmentKind::lower_leg},
        {{j[kLeftShoulder], j[kLeftElbow]}, SegmentKind::upper_arm},
        {{j[kRightShoulder], j[kRightElbow]}, SegmentKind::upper_arm},
        {{j[kLeftElbow], j[kLeftWrist]}, SegmentKind::lower_arm},
        {{j[kRightElbow], j[kRightWrist]}, SegmentKind::lower_arm},
    }};
}

PosePrediction prediction_from_parse(const ParseResult& result, const SkeletonTree& tree,
                                     int cell_size, const std::string& image_id) {
    PosePrediction pred;
    pred.image_id = image_id;
    pred.valid = true;
    for (int jnt = 0; jnt < kNumJoints; ++jnt) {
        const PartParse& pp = result.parts[static_cast<size_t>(kJointPartBase + jnt)];
        pred.joints[static_cast<size_t>(jnt)] = Vec2((pp.loc.x + 0.5) * cell_size,
                                                     (pp.loc.y + 0.5) * cell_size);
    }
    (void)tree;
    return pred;
}

namespace {

const char* kKindNames[kNumSegmentKinds] = {"Torso", "Head", "Upper Leg",
                                            "Lower Leg", "U.Arm", "L.Arm"};

// whether the truth joints bounding a segment are all visible
bool segment_visible(const Annotation& ann, int seg_index) {
    static const int joints_of[kNumSegments][3] = {
        {kNeck, kLeftHip, kRightHip}, // torso uses the hip midpoint
        {kHeadTop, kNeck, -1},
        {kLeftHip, kLeftKnee, -1},
        {kRightHip, kRightKnee, -1},
        {kLeftKnee, kLeftAnkle, -1},
        {kRightKnee, kRightAnkle, -1},
        {kLeftShoulder, kLeftElbow, -1},
        {kRightShoulder, kRightElbow, -1},
        {kLeftElbow, kLeftWrist, -1},
        {kRightElbow, kRightWrist, -1},
    };
    for (int j : joints_of[seg_index]) {
        if (j < 0) continue;
        if (!ann.joints[static_cast<size_t>(j)].visible) return false;
    }
    return true;
}

} // namespace

PcpReport evaluate(const std::vector<PosePrediction>& predictions,
                   const std::vector<Annotation>& annotations, double fraction) {
    std::map<std::string, const PosePrediction*> by_id;
    for (const PosePrediction& p : predictions)
        if (p.valid) by_id[p.image_id] = &p;

    PcpReport report;
    for (int k = 0; k < kNumSegmentKinds; ++k)
        report.rows[static_cast<size_t>(k)].name = kKindNames[k];

    for (const Annotation& ann : annotations) {
        std::array<Vec2, kNumJoints> truth_joints;
        for (int j = 0; j < kNumJoints; ++j)
            truth_joints[static_cast<size_t>(j)] = ann.joints[static_cast<size_t>(j)].pt;
        const auto truth_segs = pose_segments(truth_joints);

        const auto it = by_id.find(ann.image_id);
        std::array<NamedSegment, kNumSegments> pred_segs;
        const bool have_pred = it != by_id.end();
        if (have_pred) pred_segs = pose_segments(it->second->joints);

        for (int s = 0; s < kNumSegments; ++s) {
            if (!segment_visible(ann, s)) continue;
            const int kind = static_cast<int>(truth_segs[static_cast<size_t>(s)].kind);
            auto& row = report.rows[static_cast<size_t>(kind)];
            ++row.total;
            ++report.segments_total;
            if (have_pred && pcp_correct(pred_segs[static_cast<size_t>(s)].seg,
                                         truth_segs[static_cast<size_t>(s)].seg, fraction)) {
                ++row.correct;
                ++report.correct_total;
            }
        }
    }

    for (auto& row : report.rows)
        row.percent = row.total > 0 ? 100.0 * row.correct / row.total : 0.0;
    report.percent_total = report.segments_total > 0
                               ? 100.0 * report.correct_total / report.segments_total
                               : 0.0;
    return report;
}

std::string format_report_table(const PcpReport& report) {
    std::ostringstream os;
    os << "Part         Correct  Total  PCP(%)\n";
    char line[128];
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof(line), "%-12s %7d %6d  %6.1f\n", row.name.c_str(), row.correct,
                      row.total, row.percent);
        os << line;
    }
    std::snprintf(line, sizeof(line), "%-12s %7d %6d  %6.1f\n", "Total", report.correct_total,
                  report.segments_total, report.percent_total);
    os << line;
    return os.str();
}

std::string report_to_csv(const PcpReport& report) {
    std::ostringstream os;
    os << "part,correct,total,percent\n";
    for (const auto& row : report.rows)
        os << row.name << "," << row.correct << "," << row.total << "," << row.percent << "\n";
    os << "Total," << report.correct_total << "," << report.segments_total << ","
       << report.percent_total << "\n";
    return os.str();
}

} // namespace pose
