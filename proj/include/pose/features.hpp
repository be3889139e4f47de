#pragma once

#include <vector>

#include "pose/geometry.hpp"
#include "pose/grid.hpp"
#include "pose/image.hpp"

namespace pose {

// 31 channels per cell: 18 contrast-sensitive orientation bins, 9
// contrast-insensitive bins, 4 block-normalization channels (block order
// B00, B10, B01, B11 where Bxy covers cells [cx-x, cx-x+1] x [cy-y, cy-y+1]).
constexpr int kHogDim = 31;
constexpr int kSignedBins = 18;
constexpr int kUnsignedBins = 9;

struct FeatureMap {
    int cells_wide = 0;
    int cells_high = 0;
    int feature_dim = 0;
    int cell_size = 0;
    std::vector<double> data; // row-major cells, feature_dim contiguous

    const double* cell(int cx, int cy) const {
        return data.data() + (static_cast<size_t>(cy) * cells_wide + cx) * feature_dim;
    }
    double* cell(int cx, int cy) {
        return data.data() + (static_cast<size_t>(cy) * cells_wide + cx) * feature_dim;
    }
};

// Gradients by centered differences on the grayscale image, orientation
// snapped to the best of 18 signed bins, hard cell binning, 2x2-block L2
// normalization with per-entry clipping at 0.2.
FeatureMap extract_features(const ImageBuffer& image, int cell_size);

// Patch of box.w x box.h cells centered at `location` (center cell at offset
// ((w-1)/2, (h-1)/2) inside the box), flattened row-major with feature_dim
// contiguous; cells outside the map read as zero vectors. Filters in
// ModelParams use the identical layout.
std::vector<double> crop_patch_feature(const FeatureMap& map, Cell location, BoxSize box);

// Dense cross-correlation response: out(x, y) = <filter, patch centered at
// (x, y)> with the same zero-padding convention as crop_patch_feature.
Grid correlate_filter(const FeatureMap& map, const std::vector<double>& filter, BoxSize box);

} // namespace pose
