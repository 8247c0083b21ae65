// Fixed-parameter image perturbations: JPEG recompression at q=80, a central
// 90%-per-axis crop resized back, and a screenshot simulation (x0.75 bilinear
// downscale, JPEG q=70, upscale back). All kinds preserve dimensions and are
// fully deterministic.
#pragma once

#include <stdexcept>
#include <string>

#include "xprov/codec.hpp"
#include "xprov/image.hpp"

namespace xprov {

enum class Perturbation { none, jpeg_q80, crop10_resize, screenshot_sim };

inline const char* to_string(Perturbation p) {
    switch (p) {
        case Perturbation::none: return "none";
        case Perturbation::jpeg_q80: return "jpeg_q80";
        case Perturbation::crop10_resize: return "crop10_resize";
        case Perturbation::screenshot_sim: return "screenshot_sim";
    }
    return "?";
}

inline Perturbation perturbation_from_string(const std::string& s) {
    if (s == "none") return Perturbation::none;
    if (s == "jpeg_q80" || s == "jpeg") return Perturbation::jpeg_q80;
    if (s == "crop10_resize" || s == "crop10") return Perturbation::crop10_resize;
    if (s == "screenshot_sim" || s == "screenshot") return Perturbation::screenshot_sim;
    throw std::invalid_argument("unknown perturbation: " + s);
}

// Central window retained by crop10_resize: 90% of each axis, floored.
struct CropWindow {
    int x, y, width, height;
};

inline CropWindow crop10_window(int width, int height) {
    CropWindow w{};
    w.width = width * 9 / 10;
    w.height = height * 9 / 10;
    w.x = (width - w.width) / 2;
    w.y = (height - w.height) / 2;
    return w;
}

inline Image apply(const Image& img, Perturbation p) {
    const bool uses_jpeg = p == Perturbation::jpeg_q80 || p == Perturbation::screenshot_sim;
    if (uses_jpeg && (img.width < 8 || img.height < 8))
        throw std::invalid_argument("perturbation needs at least 8x8 pixels for JPEG kinds");
    switch (p) {
        case Perturbation::none:
            return img;
        case Perturbation::jpeg_q80:
            return jpeg_decode(jpeg_encode(img, 80));
        case Perturbation::crop10_resize: {
            const CropWindow w = crop10_window(img.width, img.height);
            return resize_bilinear(crop_center(img, w.width, w.height), img.width, img.height);
        }
        case Perturbation::screenshot_sim: {
            const Image down = resize_bilinear(img, img.width * 3 / 4, img.height * 3 / 4);
            return resize_bilinear(jpeg_decode(jpeg_encode(down, 70)), img.width, img.height);
        }
    }
    throw std::invalid_argument("unknown perturbation kind");
}

}  // namespace xprov
