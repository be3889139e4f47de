#include "pose/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pose/error.hpp"

namespace pose {

namespace {

int read_pnm_token(std::istream& in, const std::string& path) {
    // skip whitespace and '#' comments
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        if (c != EOF) c = in.get();
    }
    if (c == EOF) fail("io_error", "truncated PNM header: " + path);
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) fail("io_error", "malformed PNM header: " + path);
    return value;
}

} // namespace

ImageBuffer read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io_error", "cannot open image: " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    int channels = 0;
    if (magic[0] == 'P' && magic[1] == '5') channels = 1;
    else if (magic[0] == 'P' && magic[1] == '6') channels = 3;
    else fail("io_error", "unsupported image format (want binary PGM/PPM): " + path);

    const int w = read_pnm_token(in, path);
    const int h = read_pnm_token(in, path);
    const int maxval = read_pnm_token(in, path);
    if (w <= 0 || h <= 0) fail("io_error", "bad PNM dimensions: " + path);
    if (maxval != 255) fail("io_error", "only maxval 255 PNM supported: " + path);

    ImageBuffer img(w, h, channels);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        fail("io_error", "truncated PNM payload: " + path);
    return img;
}

void write_pnm(const ImageBuffer& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        fail("io_error", "PNM writer needs 1 or 3 channels");
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("io_error", "cannot write image: " + path);
        out << (img.channels == 1 ? "P5" : "P6") << "\n"
            << img.width << " " << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.pixels.data()),
                  static_cast<std::streamsize>(img.pixels.size()));
        if (!out) fail("io_error", "short write: " + path);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail("io_error", "rename failed for " + path + ": " + ec.message());
}

ImageBuffer to_gray(const ImageBuffer& img) {
    if (img.channels == 1) return img;
    ImageBuffer out(img.width, img.height, 1);
    const size_t n = static_cast<size_t>(img.width) * img.height;
    for (size_t i = 0; i < n; ++i) {
        const double r = img.pixels[i * 3 + 0];
        const double g = img.pixels[i * 3 + 1];
        const double b = img.pixels[i * 3 + 2];
        const double y = 0.299 * r + 0.587 * g + 0.114 * b;
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
    }
    return out;
}

namespace {

// Catmull-Rom kernel weights for fractional offset t.
inline void cubic_weights(double t, double w[4]) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

} // namespace

ImageBuffer resize_bicubic(const ImageBuffer& img, int new_w, int new_h) {
    if (new_w <= 0 || new_h <= 0) fail("io_error", "bad resize dimensions");
    if (new_w == img.width && new_h == img.height) return img;
    ImageBuffer out(new_w, new_h, img.channels);
    const double sx = static_cast<double>(img.width) / new_w;
    const double sy = static_cast<double>(img.height) / new_h;

#pragma omp parallel for schedule(static)
    for (int oy = 0; oy < new_h; ++oy) {
        for (int ox = 0; ox < new_w; ++ox) {
            const double fx = (ox + 0.5) * sx - 0.5;
            const double fy = (oy + 0.5) * sy - 0.5;
            const int ix = static_cast<int>(std::floor(fx));
            const int iy = static_cast<int>(std::floor(fy));
            double wx[4], wy[4];
            cubic_weights(fx - ix, wx);
            cubic_weights(fy - iy, wy);
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int j = 0; j < 4; ++j) {
                    const int y = std::clamp(iy - 1 + j, 0, img.height - 1);
                    double row = 0.0;
                    for (int i = 0; i < 4; ++i) {
                        const int x = std::clamp(ix - 1 + i, 0, img.width - 1);
                        row += wx[i] * img.at(x, y, c);
                    }
                    acc += wy[j] * row;
                }
                out.set(ox, oy, c,
                        static_cast<std::uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0))));
            }
        }
    }
    return out;
}

} // namespace pose
