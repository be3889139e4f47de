#pragma once

#include <string>
#include <vector>

#include "pose/image.hpp"
#include "pose/skeleton.hpp"

namespace pose {

constexpr double kCanonicalHeight = 150.0; // person height after rescaling

// manifest.json:
//   {
//     "annotations": "annotations.jsonl",
//     "root": ".",
//     "train": ["images/pos_0000.pgm", ...],
//     "test": [...],
//     "negatives": [...],
//     "joint_remap": [0,1,...,13]        // optional source->canonical order
//   }
struct DatasetManifest {
    std::string dir; // directory of the manifest file
    std::string root;
    std::string annotations_path;
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::vector<std::string> negatives;
    std::vector<int> joint_remap; // empty = identity

    std::string resolve(const std::string& rel) const;
};

DatasetManifest load_manifest(const std::string& path);

// annotations.jsonl: one object per line,
//   {"height_px": 150.0, "image": "images/pos_0000.pgm",
//    "joints": [[x, y, visible], ... 14 entries]}
// joints are stored in canonical order unless a remap is given.
std::vector<Annotation> load_annotations(const std::string& path,
                                         const std::vector<int>& remap = {});

// canonical writer: load_annotations(write_annotations(x)) round-trips
// byte-identically for files this writer produced
void write_annotations(const std::vector<Annotation>& annotations, const std::string& path);

struct LoadedExample {
    Annotation ann;
    ImageBuffer image;
};

struct Dataset {
    std::vector<LoadedExample> train;
    std::vector<LoadedExample> test;
    std::vector<ImageBuffer> negatives;
};

// Loads splits and verifies annotations (14 joints, visible joints inside
// the image). With rescale_to_canonical, people are resized to 150 px height
// (bicubic) and coordinates scaled to match.
Dataset load_dataset(const std::string& manifest_path, bool rescale_to_canonical = true);

} // namespace pose
