#include "pose/distance_transform.hpp"

#include <cmath>
#include <limits>

#include "pose/error.hpp"

namespace pose {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Envelope core writing into caller-provided buffers. v/z are scratch of
// size n and n+1.
void dt1d_core(const double* f, int n, double w_lin, double w_quad, double anchor,
               double* out, int* src, int* v, double* z) {
    // u-space: parabola from source q evaluated at u is
    //   f[q] + w_lin*(u - q) + w_quad*(u - q)^2,  u = x - anchor.
    auto intersect = [&](int q, int r) {
        return ((f[r] - f[q]) - w_lin * (r - q) + w_quad * (double(r) * r - double(q) * q)) /
               (2.0 * w_quad * (r - q));
    };

    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s = intersect(v[k], q);
        while (s <= z[k]) {
            --k;
            s = intersect(v[k], q);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }

    k = 0;
    for (int x = 0; x < n; ++x) {
        const double u = x - anchor;
        while (z[k + 1] < u) ++k;
        const double d = u - v[k];
        out[x] = f[v[k]] + w_lin * d + w_quad * d * d;
        src[x] = v[k];
    }
}

void check_quad(double w_quad) {
    if (!(w_quad <= kMaxQuadWeight))
        fail("non_concave_deformation",
             "quadratic deformation weight must be <= " + std::to_string(kMaxQuadWeight));
}

// blocked transpose of a w x h row-major grid into an h-stride layout
template <typename T>
void transpose_grid(const T* src, int w, int h, T* dst) {
    constexpr int kBlock = 32;
#pragma omp parallel for schedule(static) collapse(2)
    for (int y0 = 0; y0 < h; y0 += kBlock) {
        for (int x0 = 0; x0 < w; x0 += kBlock) {
            const int y1 = std::min(y0 + kBlock, h);
            const int x1 = std::min(x0 + kBlock, w);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    dst[static_cast<size_t>(x) * h + y] = src[static_cast<size_t>(y) * w + x];
        }
    }
}

} // namespace

Dt1dResult distance_transform_1d(std::span<const double> f, double w_lin, double w_quad,
                                 double anchor) {
    check_quad(w_quad);
    const int n = static_cast<int>(f.size());
    if (n < 1) fail("bad_arguments", "distance transform needs at least one element");
    Dt1dResult r;
    r.scores.resize(static_cast<size_t>(n));
    r.sources.resize(static_cast<size_t>(n));
    std::vector<int> v(static_cast<size_t>(n));
    std::vector<double> z(static_cast<size_t>(n) + 1);
    dt1d_core(f.data(), n, w_lin, w_quad, anchor, r.scores.data(), r.sources.data(), v.data(),
              z.data());
    return r;
}

namespace {

// per-thread scratch so repeated transforms do not reallocate
struct Dt2dScratch {
    std::vector<double> rowpass;
    std::vector<int> rowsrc;
    std::vector<double> columns;
    std::vector<double> col_out;
    std::vector<int> col_src;
};

} // namespace

Dt2dResult distance_transform_2d(const Grid& f, const std::array<double, 4>& w, Vec2 anchor) {
    check_quad(w[2]);
    check_quad(w[3]);
    if (f.w < 1 || f.h < 1) fail("bad_arguments", "empty grid");

    static thread_local Dt2dScratch scratch;
    const size_t cells = static_cast<size_t>(f.w) * f.h;
    scratch.rowpass.resize(cells);
    scratch.rowsrc.resize(cells);
    scratch.columns.resize(cells);
    scratch.col_out.resize(cells);
    scratch.col_src.resize(cells);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < f.h; ++y) {
        std::vector<int> v(static_cast<size_t>(f.w));
        std::vector<double> z(static_cast<size_t>(f.w) + 1);
        dt1d_core(&f.v[static_cast<size_t>(y) * f.w], f.w, w[0], w[2], anchor.x,
                  &scratch.rowpass[static_cast<size_t>(y) * f.w],
                  &scratch.rowsrc[static_cast<size_t>(y) * f.w], v.data(), z.data());
    }

    // column pass on a transposed buffer, so both 1-D sweeps stream
    // contiguous memory regardless of grid size
    std::vector<double>& columns = scratch.columns;
    transpose_grid(scratch.rowpass.data(), f.w, f.h, columns.data());
    std::vector<double>& col_out = scratch.col_out;
    std::vector<int>& col_src = scratch.col_src;

#pragma omp parallel for schedule(static)
    for (int x = 0; x < f.w; ++x) {
        std::vector<int> v(static_cast<size_t>(f.h));
        std::vector<double> z(static_cast<size_t>(f.h) + 1);
        dt1d_core(&columns[static_cast<size_t>(x) * f.h], f.h, w[1], w[3], anchor.y,
                  &col_out[static_cast<size_t>(x) * f.h], &col_src[static_cast<size_t>(x) * f.h],
                  v.data(), z.data());
    }

    Dt2dResult r;
    r.scores = Grid(f.w, f.h);
    r.src_x = IndexGrid(f.w, f.h);
    r.src_y = IndexGrid(f.w, f.h);
    transpose_grid(col_out.data(), f.h, f.w, r.scores.v.data());
    transpose_grid(col_src.data(), f.h, f.w, r.src_y.v.data());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < f.h; ++y) {
        for (int x = 0; x < f.w; ++x) {
            const int ys = r.src_y.at(x, y);
            r.src_x.at(x, y) = scratch.rowsrc[static_cast<size_t>(ys) * f.w + x];
        }
    }
    return r;
}

} // namespace pose
