#include <doctest.h>

#include <cmath>

#include "pose/error.hpp"
#include "pose/features.hpp"
#include "pose/reference.hpp"
#include "pose/rng.hpp"

using namespace pose;

namespace {

ImageBuffer random_image(Rng& rng, int w, int h) {
    ImageBuffer img(w, h, 1);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

} // namespace

TEST_CASE("constant image has zero gradient channels everywhere") {
    const ImageBuffer img(40, 40, 1, 77);
    const FeatureMap fm = extract_features(img, 4);
    CHECK(fm.cells_wide == 10);
    CHECK(fm.cells_high == 10);
    CHECK(fm.feature_dim == kHogDim);
    for (double v : fm.data) CHECK(v == 0.0);
}

TEST_CASE("images smaller than one cell are rejected") {
    CHECK_THROWS_AS(extract_features(ImageBuffer(3, 10, 1), 4), Error);
    CHECK_THROWS_AS(extract_features(ImageBuffer(10, 10, 1), 1), Error);
}

TEST_CASE("vertical step edge concentrates energy in adjacent cell columns") {
    // step at x = 32 (a cell boundary): gradient lives at pixels x = 31, 32
    ImageBuffer img(64, 64, 1);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) img.set(x, y, 0, x < 32 ? 50 : 200);
    const FeatureMap fm = extract_features(img, 4);

    // hand computation: 4 pixels x |150| per interior cell in columns 7 and 8,
    // every block norm clips, so bin 0 reads 0.5 * 4 * 0.2 = 0.4 and each
    // normalization channel reads 0.2357 * 0.2
    for (int cy = 2; cy <= 13; ++cy) {
        for (int cx : {7, 8}) {
            const double* cell = fm.cell(cx, cy);
            CHECK(cell[0] == doctest::Approx(0.4).epsilon(1e-6));
            for (int o = 1; o < kSignedBins; ++o) CHECK(cell[o] == 0.0);
            CHECK(cell[kSignedBins] == doctest::Approx(0.4).epsilon(1e-6));
            for (int o = 1; o < kUnsignedBins; ++o) CHECK(cell[kSignedBins + o] == 0.0);
            for (int b = 0; b < 4; ++b)
                CHECK(cell[27 + b] == doctest::Approx(0.2357 * 0.2).epsilon(1e-6));
        }
        for (int cx : {0, 1, 2, 3, 4, 5, 11, 12, 13, 14, 15}) {
            const double* cell = fm.cell(cx, cy);
            for (int c = 0; c < kHogDim; ++c) CHECK(cell[c] == 0.0);
        }
    }
}

TEST_CASE("rotating the image 180 degrees permutes the channels analytically") {
    Rng rng(123);
    const ImageBuffer img = random_image(rng, 64, 48);
    ImageBuffer rot(64, 48, 1);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x) rot.set(x, y, 0, img.at(63 - x, 47 - y));

    const FeatureMap a = extract_features(img, 4);
    const FeatureMap b = extract_features(rot, 4);
    for (int cy = 0; cy < a.cells_high; ++cy) {
        for (int cx = 0; cx < a.cells_wide; ++cx) {
            const double* ca = a.cell(cx, cy);
            const double* cb = b.cell(a.cells_wide - 1 - cx, a.cells_high - 1 - cy);
            for (int o = 0; o < kSignedBins; ++o)
                CHECK(std::abs(ca[o] - cb[(o + 9) % 18]) < 1e-12);
            for (int o = 0; o < kUnsignedBins; ++o)
                CHECK(std::abs(ca[kSignedBins + o] - cb[kSignedBins + o]) < 1e-12);
            // blocks B00/B10/B01/B11 swap to B11/B01/B10/B00
            static const int perm[4] = {3, 2, 1, 0};
            for (int n = 0; n < 4; ++n)
                CHECK(std::abs(ca[27 + n] - cb[27 + perm[n]]) < 1e-12);
        }
    }
}

TEST_CASE("feature map entries stay in their documented ranges") {
    Rng rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        const ImageBuffer img = random_image(rng, 44, 36);
        const FeatureMap fm = extract_features(img, 4);
        for (int cy = 0; cy < fm.cells_high; ++cy) {
            for (int cx = 0; cx < fm.cells_wide; ++cx) {
                const double* cell = fm.cell(cx, cy);
                for (int c = 0; c < 27; ++c) {
                    CHECK(std::isfinite(cell[c]));
                    CHECK(cell[c] >= 0.0);
                    CHECK(cell[c] <= 0.4 + 1e-12);
                }
                for (int b = 0; b < 4; ++b) {
                    CHECK(cell[27 + b] >= 0.0);
                    CHECK(cell[27 + b] <= 1.0);
                }
            }
        }
    }
}

TEST_CASE("crop is an exact interior copy with zero padding outside") {
    Rng rng(17);
    const ImageBuffer img = random_image(rng, 48, 48);
    const FeatureMap fm = extract_features(img, 4);

    const BoxSize box{5, 5};
    const auto inner = crop_patch_feature(fm, {6, 6}, box);
    for (int by = 0; by < 5; ++by)
        for (int bx = 0; bx < 5; ++bx)
            for (int d = 0; d < fm.feature_dim; ++d)
                CHECK(inner[(static_cast<size_t>(by) * 5 + bx) * fm.feature_dim + d] ==
                      fm.cell(6 + bx - 2, 6 + by - 2)[d]);

    const auto corner = crop_patch_feature(fm, {0, 0}, box);
    for (int by = 0; by < 5; ++by)
        for (int bx = 0; bx < 5; ++bx) {
            const bool outside = (bx < 2 || by < 2);
            for (int d = 0; d < fm.feature_dim; ++d) {
                const double v = corner[(static_cast<size_t>(by) * 5 + bx) * fm.feature_dim + d];
                if (outside)
                    CHECK(v == 0.0);
                else
                    CHECK(v == fm.cell(bx - 2, by - 2)[d]);
            }
        }
}

TEST_CASE("crop dot filter equals the correlation response") {
    Rng rng(29);
    const ImageBuffer img = random_image(rng, 64, 52);
    const FeatureMap fm = extract_features(img, 4);
    const BoxSize box{6, 9};
    std::vector<double> filter(static_cast<size_t>(box.w) * box.h * fm.feature_dim);
    for (auto& v : filter) v = rng.uniform(-1.0, 1.0);

    const Grid resp = correlate_filter(fm, filter, box);
    const Grid naive = ref::correlate_reference(fm, filter, box);
    for (int trial = 0; trial < 40; ++trial) {
        const Cell loc{rng.uniform_int(0, fm.cells_wide - 1),
                       rng.uniform_int(0, fm.cells_high - 1)};
        const auto patch = crop_patch_feature(fm, loc, box);
        double dot = 0.0;
        for (size_t i = 0; i < patch.size(); ++i) dot += patch[i] * filter[i];
        CHECK(std::abs(dot - resp.at(loc.x, loc.y)) < 1e-9);
        CHECK(std::abs(naive.at(loc.x, loc.y) - resp.at(loc.x, loc.y)) < 1e-9);
    }
}

TEST_CASE("correlation basics: zero filter, unit projection, length check") {
    Rng rng(31);
    const ImageBuffer img = random_image(rng, 40, 40);
    const FeatureMap fm = extract_features(img, 4);

    std::vector<double> zero(static_cast<size_t>(fm.feature_dim), 0.0);
    const Grid z = correlate_filter(fm, zero, {1, 1});
    for (double v : z.v) CHECK(v == 0.0);

    std::vector<double> unit(static_cast<size_t>(fm.feature_dim), 0.0);
    unit[20] = 1.0;
    const Grid proj = correlate_filter(fm, unit, {1, 1});
    for (int cy = 0; cy < fm.cells_high; ++cy)
        for (int cx = 0; cx < fm.cells_wide; ++cx)
            CHECK(proj.at(cx, cy) == fm.cell(cx, cy)[20]);

    CHECK_THROWS_AS(correlate_filter(fm, zero, {2, 1}), Error);
}

TEST_CASE("correlation is linear in the filter") {
    Rng rng(37);
    const ImageBuffer img = random_image(rng, 40, 40);
    const FeatureMap fm = extract_features(img, 4);
    const BoxSize box{3, 3};
    const size_t len = static_cast<size_t>(box.w) * box.h * fm.feature_dim;
    std::vector<double> f1(len), f2(len), mix(len);
    for (size_t i = 0; i < len; ++i) {
        f1[i] = rng.uniform(-1.0, 1.0);
        f2[i] = rng.uniform(-1.0, 1.0);
        mix[i] = 2.5 * f1[i] - 1.25 * f2[i];
    }
    const Grid g1 = correlate_filter(fm, f1, box);
    const Grid g2 = correlate_filter(fm, f2, box);
    const Grid gm = correlate_filter(fm, mix, box);
    for (size_t i = 0; i < gm.v.size(); ++i)
        CHECK(std::abs(gm.v[i] - (2.5 * g1.v[i] - 1.25 * g2.v[i])) < 1e-9);
}

TEST_CASE("shifting the image by one cell shifts interior responses") {
    Rng rng(41);
    const ImageBuffer img = random_image(rng, 64, 64);
    ImageBuffer shifted(64, 64, 1, 0);
    for (int y = 0; y < 64; ++y)
        for (int x = 4; x < 64; ++x) shifted.set(x, y, 0, img.at(x - 4, y));

    const FeatureMap a = extract_features(img, 4);
    const FeatureMap b = extract_features(shifted, 4);
    const BoxSize box{3, 3};
    std::vector<double> filter(static_cast<size_t>(box.w) * box.h * a.feature_dim);
    for (auto& v : filter) v = rng.uniform(-1.0, 1.0);
    const Grid ga = correlate_filter(a, filter, box);
    const Grid gb = correlate_filter(b, filter, box);

    // stay away from both image borders and the filter apron
    for (int cy = 4; cy < a.cells_high - 4; ++cy)
        for (int cx = 4; cx < a.cells_wide - 5; ++cx)
            CHECK(gb.at(cx + 1, cy) == doctest::Approx(ga.at(cx, cy)).epsilon(1e-12));
}
