#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pose/image.hpp"
#include "pose/skeleton.hpp"

namespace pose {

// Stick-figure dataset with per-part distinct stripe textures and pixel-exact
// joint annotations; a desk-scale stand-in for real pose datasets.
struct SynthConfig {
    std::uint64_t seed = 7;
    int image_width = 176;
    int image_height = 224;
    double scale_min = 150.0; // person height in px, must stay within [100, 150]
    double scale_max = 150.0;
    double limb_thickness = 0.055; // fraction of scale
    double clutter = 0.1;          // distractor-bar density, 0 = flat background
    // pose jitter, radians
    double lean_range = 0.06;
    double arm_swing = 0.30;
    double arm_bend = 0.35;
    double leg_swing = 0.14;
    double leg_bend = 0.18;

    void validate() const;
};

struct SynthSample {
    ImageBuffer image;
    Annotation ann;
    std::vector<Vec2> part_centers; // renderer truth for all 25 parts
};

// Deterministic per (config.seed, index).
SynthSample generate_figure(const SynthConfig& config, std::uint64_t index);
ImageBuffer generate_negative(const SynthConfig& config, std::uint64_t index);

// Writes images/, annotations.jsonl and manifest.json (train = first half of
// the positives, test = the rest, plus clutter-only negatives).
void write_synth_dataset(const SynthConfig& config, int n, const std::string& out_dir);

} // namespace pose
