#include "pose/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pose/error.hpp"

namespace pose {

using nlohmann::json;

std::string DatasetManifest::resolve(const std::string& rel) const {
    std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(dir) / root / rel).lexically_normal().string();
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("bad_manifest", "cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("bad_manifest", "malformed manifest " + path + ": " + e.what());
    }
    DatasetManifest m;
    m.dir = std::filesystem::path(path).parent_path().string();
    if (m.dir.empty()) m.dir = ".";
    try {
        m.root = j.value("root", ".");
        m.annotations_path = j.value("annotations", "");
        for (const auto& v : j.value("train", json::array())) m.train.push_back(v);
        for (const auto& v : j.value("test", json::array())) m.test.push_back(v);
        for (const auto& v : j.value("negatives", json::array())) m.negatives.push_back(v);
        if (j.contains("joint_remap")) {
            for (const auto& v : j["joint_remap"]) m.joint_remap.push_back(v);
            if (m.joint_remap.size() != static_cast<size_t>(kNumJoints))
                fail("bad_manifest", "joint_remap must list exactly 14 indices");
        }
    } catch (const json::exception& e) {
        fail("bad_manifest", "manifest fields malformed in " + path + ": " + e.what());
    }
    return m;
}

std::vector<Annotation> load_annotations(const std::string& path,
                                         const std::vector<int>& remap) {
    std::ifstream in(path);
    if (!in) fail("bad_annotation", "cannot open annotations: " + path);
    if (!remap.empty() && remap.size() != static_cast<size_t>(kNumJoints))
        fail("bad_annotation", "joint remap must have 14 entries");

    std::vector<Annotation> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail("bad_annotation",
                 path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        Annotation ann;
        try {
            ann.image_id = j.at("image");
            ann.height_px = j.at("height_px");
            const auto& joints = j.at("joints");
            if (joints.size() != static_cast<size_t>(kNumJoints))
                fail("bad_annotation", path + " line " + std::to_string(line_no) + ": record " +
                                           ann.image_id + " has " +
                                           std::to_string(joints.size()) +
                                           " joints, expected 14");
            for (int src = 0; src < kNumJoints; ++src) {
                const int dst = remap.empty() ? src : remap[static_cast<size_t>(src)];
                if (dst < 0 || dst >= kNumJoints)
                    fail("bad_annotation", "joint remap entry out of range");
                const auto& rec = joints[static_cast<size_t>(src)];
                if (rec.size() != 3)
                    fail("bad_annotation", path + " line " + std::to_string(line_no) +
                                               ": joint entries are [x, y, visible]");
                JointAnnotation& ja = ann.joints[static_cast<size_t>(dst)];
                ja.pt = Vec2(rec[0], rec[1]);
                ja.visible = static_cast<int>(rec[2]) != 0;
            }
        } catch (const json::exception& e) {
            fail("bad_annotation",
                 path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(std::move(ann));
    }
    return out;
}

void write_annotations(const std::vector<Annotation>& annotations, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) fail("io_error", "cannot write annotations: " + path);
        for (const Annotation& ann : annotations) {
            json joints = json::array();
            for (const JointAnnotation& ja : ann.joints)
                joints.push_back(json::array({ja.pt.x, ja.pt.y, ja.visible ? 1 : 0}));
            json j{{"height_px", ann.height_px}, {"image", ann.image_id}, {"joints", joints}};
            out << j.dump() << "\n";
        }
        if (!out) fail("io_error", "short write: " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail("io_error", "rename failed for " + path + ": " + ec.message());
}

namespace {

LoadedExample load_one(const DatasetManifest& m, const std::map<std::string, Annotation>& by_id,
                       const std::string& id, bool rescale) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) fail("bad_manifest", "no annotation for image " + id);
    LoadedExample ex;
    ex.ann = it->second;
    const std::string img_path = m.resolve(id);
    if (!std::filesystem::exists(img_path))
        fail("io_error", "missing image file: " + img_path);
    ex.image = read_pnm(img_path);

    for (int j = 0; j < kNumJoints; ++j) {
        const JointAnnotation& ja = ex.ann.joints[static_cast<size_t>(j)];
        if (!ja.visible) continue;
        if (ja.pt.x < 0 || ja.pt.x >= ex.image.width || ja.pt.y < 0 ||
            ja.pt.y >= ex.image.height)
            fail("bad_annotation", "joint outside image bounds in " + id);
    }

    if (rescale && ex.ann.height_px > 0 &&
        std::abs(ex.ann.height_px - kCanonicalHeight) > 1e-9) {
        const double s = kCanonicalHeight / ex.ann.height_px;
        const int nw = std::max(1, static_cast<int>(std::lround(ex.image.width * s)));
        const int nh = std::max(1, static_cast<int>(std::lround(ex.image.height * s)));
        const double sx = static_cast<double>(nw) / ex.image.width;
        const double sy = static_cast<double>(nh) / ex.image.height;
        ex.image = resize_bicubic(ex.image, nw, nh);
        for (auto& ja : ex.ann.joints) {
            ja.pt.x *= sx;
            ja.pt.y *= sy;
        }
        ex.ann.height_px *= sy;
    }
    return ex;
}

} // namespace

Dataset load_dataset(const std::string& manifest_path, bool rescale_to_canonical) {
    const DatasetManifest m = load_manifest(manifest_path);
    if (m.annotations_path.empty())
        fail("bad_manifest", "manifest has no annotations field: " + manifest_path);
    const auto annotations = load_annotations(m.resolve(m.annotations_path), m.joint_remap);
    std::map<std::string, Annotation> by_id;
    for (const Annotation& a : annotations) by_id[a.image_id] = a;

    Dataset ds;
    for (const std::string& id : m.train)
        ds.train.push_back(load_one(m, by_id, id, rescale_to_canonical));
    for (const std::string& id : m.test)
        ds.test.push_back(load_one(m, by_id, id, rescale_to_canonical));
    for (const std::string& id : m.negatives) {
        const std::string path = m.resolve(id);
        if (!std::filesystem::exists(path)) fail("io_error", "missing image file: " + path);
        ds.negatives.push_back(read_pnm(path));
    }
    return ds;
}

} // namespace pose
