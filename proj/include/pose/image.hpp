#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pose {

// 8-bit image, interleaved channels, row-major.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 1; // 1 (gray) or 3 (rgb)
    std::vector<std::uint8_t> pixels;

    ImageBuffer() = default;
    ImageBuffer(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          pixels(static_cast<size_t>(w) * h * c, fill) {}

    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    void set(int x, int y, int c, std::uint8_t v) {
        pixels[(static_cast<size_t>(y) * width + x) * channels + c] = v;
    }
    bool empty() const { return pixels.empty(); }
};

// Binary PGM (P5) / PPM (P6), maxval 255. The only image formats supported;
// convert anything else externally.
ImageBuffer read_pnm(const std::string& path);
void write_pnm(const ImageBuffer& img, const std::string& path); // atomic (tmp + rename)

ImageBuffer to_gray(const ImageBuffer& img); // luma 0.299/0.587/0.114

// Catmull-Rom bicubic, edge-clamped.
ImageBuffer resize_bicubic(const ImageBuffer& img, int new_w, int new_h);

} // namespace pose
