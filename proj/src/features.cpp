#include "pose/features.hpp"

#include <algorithm>
#include <cmath>

#include "pose/error.hpp"

namespace pose {

namespace {

constexpr double kClip = 0.2;
constexpr double kNormEps = 1e-4;
constexpr double kTextureScale = 0.2357; // ~1/sqrt(18)

struct BinTable {
    double u[kUnsignedBins];
    double v[kUnsignedBins];
    BinTable() {
        for (int o = 0; o < kUnsignedBins; ++o) {
            const double a = static_cast<double>(o) * M_PI / kUnsignedBins;
            u[o] = std::cos(a);
            v[o] = std::sin(a);
        }
    }
};

const BinTable kBins;

// Best of 18 signed orientations for gradient (gx, gy).
inline int snap_orientation(double gx, double gy) {
    double best = 0.0;
    int best_o = 0;
    for (int o = 0; o < kUnsignedBins; ++o) {
        const double dot = kBins.u[o] * gx + kBins.v[o] * gy;
        if (dot > best) {
            best = dot;
            best_o = o;
        } else if (-dot > best) {
            best = -dot;
            best_o = o + kUnsignedBins;
        }
    }
    return best_o;
}

} // namespace

FeatureMap extract_features(const ImageBuffer& image, int cell_size) {
    if (cell_size < 2) fail("image_too_small", "cell_size must be >= 2");
    if (image.width < cell_size || image.height < cell_size)
        fail("image_too_small", "image smaller than one cell");

    const ImageBuffer gray = to_gray(image);
    FeatureMap fm;
    fm.cell_size = cell_size;
    fm.cells_wide = image.width / cell_size;
    fm.cells_high = image.height / cell_size;
    fm.feature_dim = kHogDim;
    fm.data.assign(static_cast<size_t>(fm.cells_wide) * fm.cells_high * kHogDim, 0.0);

    const int cw = fm.cells_wide;
    const int ch = fm.cells_high;

    // per-cell signed orientation histograms
    std::vector<double> hist(static_cast<size_t>(cw) * ch * kSignedBins, 0.0);

    // Border pixels have no centered difference; they contribute nothing.
#pragma omp parallel for schedule(static)
    for (int cy = 0; cy < ch; ++cy) {
        const int y0 = std::max(cy * cell_size, 1);
        const int y1 = std::min((cy + 1) * cell_size, gray.height - 1);
        for (int y = y0; y < y1; ++y) {
            for (int x = 1; x < std::min(cw * cell_size, gray.width - 1); ++x) {
                const double gx = static_cast<double>(gray.at(x + 1, y)) - gray.at(x - 1, y);
                const double gy = static_cast<double>(gray.at(x, y + 1)) - gray.at(x, y - 1);
                const double mag = std::sqrt(gx * gx + gy * gy);
                if (mag == 0.0) continue;
                const int o = snap_orientation(gx, gy);
                const int cx = x / cell_size;
                hist[(static_cast<size_t>(cy) * cw + cx) * kSignedBins + o] += mag;
            }
        }
    }

    // cell gradient energy over folded orientations
    std::vector<double> energy(static_cast<size_t>(cw) * ch, 0.0);
#pragma omp parallel for schedule(static)
    for (int cy = 0; cy < ch; ++cy) {
        for (int cx = 0; cx < cw; ++cx) {
            const double* h = &hist[(static_cast<size_t>(cy) * cw + cx) * kSignedBins];
            double e = 0.0;
            for (int o = 0; o < kUnsignedBins; ++o) {
                const double s = h[o] + h[o + kUnsignedBins];
                e += s * s;
            }
            energy[static_cast<size_t>(cy) * cw + cx] = e;
        }
    }

    auto cell_energy = [&](int cx, int cy) {
        cx = std::clamp(cx, 0, cw - 1);
        cy = std::clamp(cy, 0, ch - 1);
        return energy[static_cast<size_t>(cy) * cw + cx];
    };

#pragma omp parallel for schedule(static)
    for (int cy = 0; cy < ch; ++cy) {
        for (int cx = 0; cx < cw; ++cx) {
            // block norms: B00 (cells cx..cx+1, cy..cy+1), B10, B01, B11
            double inv[4];
            int bi = 0;
            for (int by = 0; by <= 1; ++by) {
                for (int bx = 0; bx <= 1; ++bx) {
                    const int x0 = cx - bx;
                    const int y0 = cy - by;
                    const double n = cell_energy(x0, y0) + cell_energy(x0 + 1, y0) +
                                     cell_energy(x0, y0 + 1) + cell_energy(x0 + 1, y0 + 1);
                    inv[bi++] = 1.0 / std::sqrt(n + kNormEps);
                }
            }

            const double* h = &hist[(static_cast<size_t>(cy) * cw + cx) * kSignedBins];
            double* dst = fm.cell(cx, cy);
            double texture[4] = {0.0, 0.0, 0.0, 0.0};
            for (int o = 0; o < kSignedBins; ++o) {
                double sum = 0.0;
                for (int b = 0; b < 4; ++b) {
                    const double t = std::min(h[o] * inv[b], kClip);
                    sum += t;
                    texture[b] += t;
                }
                dst[o] = 0.5 * sum;
            }
            for (int o = 0; o < kUnsignedBins; ++o) {
                const double folded = h[o] + h[o + kUnsignedBins];
                double sum = 0.0;
                for (int b = 0; b < 4; ++b) sum += std::min(folded * inv[b], kClip);
                dst[kSignedBins + o] = 0.5 * sum;
            }
            for (int b = 0; b < 4; ++b)
                dst[kSignedBins + kUnsignedBins + b] = kTextureScale * texture[b];
        }
    }
    return fm;
}

std::vector<double> crop_patch_feature(const FeatureMap& map, Cell location, BoxSize box) {
    const int ox = (box.w - 1) / 2;
    const int oy = (box.h - 1) / 2;
    std::vector<double> out(static_cast<size_t>(box.w) * box.h * map.feature_dim, 0.0);
    for (int by = 0; by < box.h; ++by) {
        const int cy = location.y + by - oy;
        if (cy < 0 || cy >= map.cells_high) continue;
        for (int bx = 0; bx < box.w; ++bx) {
            const int cx = location.x + bx - ox;
            if (cx < 0 || cx >= map.cells_wide) continue;
            const double* src = map.cell(cx, cy);
            double* dst = &out[(static_cast<size_t>(by) * box.w + bx) * map.feature_dim];
            std::copy(src, src + map.feature_dim, dst);
        }
    }
    return out;
}

Grid correlate_filter(const FeatureMap& map, const std::vector<double>& filter, BoxSize box) {
    const size_t want = static_cast<size_t>(box.w) * box.h * map.feature_dim;
    if (filter.size() != want)
        fail("filter_length_mismatch", "filter length does not match box x feature_dim");

    Grid out(map.cells_wide, map.cells_high, 0.0);
    const int ox = (box.w - 1) / 2;
    const int oy = (box.h - 1) / 2;
    const int dim = map.feature_dim;

#pragma omp parallel for schedule(static)
    for (int y = 0; y < map.cells_high; ++y) {
        for (int by = 0; by < box.h; ++by) {
            const int cy = y + by - oy;
            if (cy < 0 || cy >= map.cells_high) continue;
            const double* frow = &filter[static_cast<size_t>(by) * box.w * dim];
            for (int x = 0; x < map.cells_wide; ++x) {
                const int x_lo = std::max(0, ox - x);
                const int x_hi = std::min(box.w, map.cells_wide + ox - x);
                if (x_lo >= x_hi) continue;
                const double* mrow = map.cell(x + x_lo - ox, cy);
                const double* fptr = frow + static_cast<size_t>(x_lo) * dim;
                double acc = 0.0;
                const int n = (x_hi - x_lo) * dim;
                for (int i = 0; i < n; ++i) acc += fptr[i] * mrow[i];
                out.at(x, y) += acc;
            }
        }
    }
    return out;
}

} // namespace pose
