// Raster image type and the pixel-domain primitives shared by every layer:
// BT.601 luminance, bilinear resampling, box blur, center crop, PSNR.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace xprov {

// 8-bit RGB raster, row-major, 3 samples per pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size == width * height * 3

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(checked_sample_count(w, h), 0) {}

    std::uint8_t& at(int x, int y, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    std::size_t sample_count() const { return pixels.size(); }

    bool same_size(const Image& o) const { return width == o.width && height == o.height; }

    friend bool operator==(const Image& a, const Image& b) {
        return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
    }

private:
    // Validates before the pixel vector allocates, so bad dimensions raise
    // invalid_argument rather than a length error from a wrapped-around size.
    static std::size_t checked_sample_count(int w, int h) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
    }
};

inline std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

// Luminance with the BT.601 integer weight set 77/150/29 (sum 256), kept in
// float so sub-level perturbations remain visible to the detector.
inline std::vector<float> luminance_plane(const Image& img) {
    std::vector<float> y(static_cast<std::size_t>(img.width) * img.height);
    const std::uint8_t* p = img.pixels.data();
    for (std::size_t i = 0; i < y.size(); ++i, p += 3) {
        y[i] = (77.0f * p[0] + 150.0f * p[1] + 29.0f * p[2]) * (1.0f / 256.0f);
    }
    return y;
}

// 3x3 box blur with edge replication.
inline std::vector<float> box_blur3(const std::vector<float>& src, int w, int h) {
    std::vector<float> dst(src.size());
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float s = 0.0f;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = clampi(y + dy, 0, h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = clampi(x + dx, 0, w - 1);
                    s += src[static_cast<std::size_t>(yy) * w + xx];
                }
            }
            dst[static_cast<std::size_t>(y) * w + x] = s * (1.0f / 9.0f);
        }
    }
    return dst;
}

// Bilinear sample with the half-pixel-center convention:
//   src_x = (dst_x + 0.5) * sw/dw - 0.5
// Coordinates outside the source are clamped to the border.
inline float sample_bilinear(const std::vector<float>& src, int sw, int sh, float fx, float fy) {
    fx = std::clamp(fx, 0.0f, static_cast<float>(sw - 1));
    fy = std::clamp(fy, 0.0f, static_cast<float>(sh - 1));
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, sw - 1);
    const int y1 = std::min(y0 + 1, sh - 1);
    const float ax = fx - x0;
    const float ay = fy - y0;
    const float top = src[static_cast<std::size_t>(y0) * sw + x0] * (1 - ax) +
                      src[static_cast<std::size_t>(y0) * sw + x1] * ax;
    const float bot = src[static_cast<std::size_t>(y1) * sw + x0] * (1 - ax) +
                      src[static_cast<std::size_t>(y1) * sw + x1] * ax;
    return top * (1 - ay) + bot * ay;
}

inline std::vector<float> resize_bilinear_plane(const std::vector<float>& src, int sw, int sh,
                                                int dw, int dh) {
    if (sw == dw && sh == dh) return src;
    std::vector<float> dst(static_cast<std::size_t>(dw) * dh);
    const float sx = static_cast<float>(sw) / dw;
    const float sy = static_cast<float>(sh) / dh;
    for (int y = 0; y < dh; ++y) {
        const float fy = (y + 0.5f) * sy - 0.5f;
        for (int x = 0; x < dw; ++x) {
            const float fx = (x + 0.5f) * sx - 0.5f;
            dst[static_cast<std::size_t>(y) * dw + x] = sample_bilinear(src, sw, sh, fx, fy);
        }
    }
    return dst;
}

inline Image resize_bilinear(const Image& src, int dw, int dh) {
    if (dw <= 0 || dh <= 0)
        throw std::invalid_argument("resize_bilinear: target dimensions must be positive");
    if (src.width == dw && src.height == dh) return src;
    Image dst(dw, dh);
    const float sx = static_cast<float>(src.width) / dw;
    const float sy = static_cast<float>(src.height) / dh;
    // Per-channel planes keep the inner loop simple.
    for (int c = 0; c < 3; ++c) {
        std::vector<float> plane(static_cast<std::size_t>(src.width) * src.height);
        for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = src.pixels[i * 3 + c];
        for (int y = 0; y < dh; ++y) {
            const float fy = (y + 0.5f) * sy - 0.5f;
            for (int x = 0; x < dw; ++x) {
                const float fx = (x + 0.5f) * sx - 0.5f;
                const float v = sample_bilinear(plane, src.width, src.height, fx, fy);
                dst.at(x, y, c) = clamp_u8(std::lround(v));
            }
        }
    }
    return dst;
}

// Central window of size (cw, ch); offsets round down so a 512 image cropped
// to 460 starts at (26, 26).
inline Image crop_center(const Image& src, int cw, int ch) {
    if (cw <= 0 || ch <= 0 || cw > src.width || ch > src.height)
        throw std::invalid_argument("crop_center: window must fit inside the image");
    const int ox = (src.width - cw) / 2;
    const int oy = (src.height - ch) / 2;
    Image dst(cw, ch);
    for (int y = 0; y < ch; ++y) {
        const std::uint8_t* row = &src.pixels[(static_cast<std::size_t>(y + oy) * src.width + ox) * 3];
        std::copy(row, row + static_cast<std::size_t>(cw) * 3,
                  &dst.pixels[static_cast<std::size_t>(y) * cw * 3]);
    }
    return dst;
}

// Peak signal-to-noise ratio over all RGB samples; +inf for identical images.
inline double psnr(const Image& a, const Image& b) {
    if (!a.same_size(b))
        throw std::invalid_argument("psnr: images must have identical dimensions");
    double se = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.pixels.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace xprov
