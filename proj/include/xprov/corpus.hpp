// Procedural test-image corpus. Five generator families produce deterministic,
// well-textured RGB rasters from a 64-bit seed; a corpus is a round-robin
// allocation over the families with per-image seeds derived from one master
// seed (see rng.hpp for the published mixing rule).
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xprov/image.hpp"
#include "xprov/rng.hpp"

namespace xprov {

enum class GeneratorKind { gradient, value_noise, geometric, fractal, mixed };

inline constexpr int kGeneratorKindCount = 5;
inline constexpr int kMinImageSize = 64;

inline const char* to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::gradient: return "gradient";
        case GeneratorKind::value_noise: return "value-noise";
        case GeneratorKind::geometric: return "geometric";
        case GeneratorKind::fractal: return "fractal";
        case GeneratorKind::mixed: return "mixed";
    }
    return "unknown";
}

inline GeneratorKind generator_kind_from_string(const std::string& s) {
    if (s == "gradient") return GeneratorKind::gradient;
    if (s == "value-noise") return GeneratorKind::value_noise;
    if (s == "geometric") return GeneratorKind::geometric;
    if (s == "fractal") return GeneratorKind::fractal;
    if (s == "mixed") return GeneratorKind::mixed;
    throw std::invalid_argument("unknown generator kind: " + s);
}

// Provenance record for one corpus image; (kind, seed, size) regenerates the
// pixels bit-exactly.
struct CorpusRecord {
    std::uint64_t index = 0;
    GeneratorKind kind = GeneratorKind::gradient;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t lattice_hash(std::uint64_t seed, std::uint32_t octave, int ix, int iy) {
    std::uint64_t h = seed;
    h ^= splitmix64(static_cast<std::uint64_t>(octave) * 0x9E3779B97F4A7C15ULL + 0x1234567);
    h ^= splitmix64((static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
                    static_cast<std::uint32_t>(iy));
    return splitmix64(h);
}

inline float smoothstep(float t) { return t * t * (3.0f - 2.0f * t); }

// One octave of lattice value noise in [0,1), cell size in pixels.
inline float value_noise_at(std::uint64_t seed, std::uint32_t octave, float x, float y,
                            float cell) {
    const float gx = x / cell;
    const float gy = y / cell;
    const int ix = static_cast<int>(gx);
    const int iy = static_cast<int>(gy);
    const float tx = smoothstep(gx - ix);
    const float ty = smoothstep(gy - iy);
    auto v = [&](int dx, int dy) {
        return static_cast<float>(lattice_hash(seed, octave, ix + dx, iy + dy) >> 40) *
               (1.0f / 16777216.0f);
    };
    const float a = v(0, 0) + (v(1, 0) - v(0, 0)) * tx;
    const float b = v(0, 1) + (v(1, 1) - v(0, 1)) * tx;
    return a + (b - a) * ty;
}

// Fractal sum of octaves; base_cell halves per octave down to 2 px. Fine
// octaves matter: they supply the mid-frequency texture that lets the
// watermark ride through JPEG quantization.
inline float fbm(std::uint64_t seed, float x, float y, float base_cell, int octaves,
                 float persistence, bool ridged) {
    float amp = 1.0f, sum = 0.0f, norm = 0.0f, cell = base_cell;
    for (int o = 0; o < octaves && cell >= 2.0f; ++o) {
        float v = value_noise_at(seed, static_cast<std::uint32_t>(o), x, y, cell);
        if (ridged) v = 1.0f - std::abs(2.0f * v - 1.0f);
        sum += amp * v;
        norm += amp;
        amp *= persistence;
        cell *= 0.5f;
    }
    return norm > 0.0f ? sum / norm : 0.5f;
}

// Linear remap of all samples so the image spans [4, 251]. Guarantees the
// full-dynamic-range contract for non-gradient kinds.
inline void remap_full_range(Image& img) {
    std::uint8_t lo = 255, hi = 0;
    for (std::uint8_t v : img.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo) return;
    const double scale = (251.0 - 4.0) / (hi - lo);
    for (auto& v : img.pixels) {
        v = clamp_u8(4.0 + (v - lo) * scale + 0.5);
    }
}

struct Rgb {
    float r, g, b;
};

inline Rgb random_color(Rng& rng) {
    return {static_cast<float>(rng.next_int(0, 255)), static_cast<float>(rng.next_int(0, 255)),
            static_cast<float>(rng.next_int(0, 255))};
}

inline float color_distance(const Rgb& a, const Rgb& b) {
    return std::abs(a.r - b.r) + std::abs(a.g - b.g) + std::abs(a.b - b.b);
}

inline Image gen_gradient(std::uint64_t seed, int size) {
    Rng rng(seed);
    Rgb c0 = random_color(rng);
    Rgb c1 = random_color(rng);
    // Keep the endpoints far apart so the image is not near-constant.
    while (color_distance(c0, c1) < 240.0f) c1 = random_color(rng);
    // Random gradient axis.
    const double ang = rng.next_double() * 6.283185307179586;
    const float dx = static_cast<float>(std::cos(ang));
    const float dy = static_cast<float>(std::sin(ang));
    Image img(size, size);
    const float n = static_cast<float>(size - 1);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            // Projection onto the axis, normalized to [0,1] over the frame.
            float t = (dx * x + dy * y) / n;
            t = std::clamp(0.5f + 0.5f * t / std::max(std::abs(dx) + std::abs(dy), 0.25f), 0.0f,
                           1.0f);
            img.at(x, y, 0) = clamp_u8(c0.r + t * (c1.r - c0.r));
            img.at(x, y, 1) = clamp_u8(c0.g + t * (c1.g - c0.g));
            img.at(x, y, 2) = clamp_u8(c0.b + t * (c1.b - c0.b));
        }
    }
    return img;
}

inline Image gen_value_noise(std::uint64_t seed, int size) {
    Rng rng(seed);
    const float base = static_cast<float>(size) / static_cast<float>(rng.next_int(4, 8));
    const std::uint64_t s0 = rng.next_u64(), s1 = rng.next_u64(), s2 = rng.next_u64();
    Image img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const float fx = static_cast<float>(x), fy = static_cast<float>(y);
            img.at(x, y, 0) = clamp_u8(255.0f * fbm(s0, fx, fy, base, 8, 0.55f, false));
            img.at(x, y, 1) = clamp_u8(255.0f * fbm(s1, fx, fy, base, 8, 0.55f, false));
            img.at(x, y, 2) = clamp_u8(255.0f * fbm(s2, fx, fy, base, 8, 0.55f, false));
        }
    }
    remap_full_range(img);
    return img;
}

inline Image gen_geometric(std::uint64_t seed, int size) {
    Rng rng(seed);
    const Rgb bg0 = random_color(rng);
    const Rgb bg1 = random_color(rng);
    Image img(size, size);
    for (int y = 0; y < size; ++y) {
        const float t = static_cast<float>(y) / (size - 1);
        for (int x = 0; x < size; ++x) {
            img.at(x, y, 0) = clamp_u8(bg0.r + t * (bg1.r - bg0.r));
            img.at(x, y, 1) = clamp_u8(bg0.g + t * (bg1.g - bg0.g));
            img.at(x, y, 2) = clamp_u8(bg0.b + t * (bg1.b - bg0.b));
        }
    }
    const int shapes = rng.next_int(24, 48);
    for (int s = 0; s < shapes; ++s) {
        const Rgb col = random_color(rng);
        const bool circle = rng.next_bool();
        const int cx = rng.next_int(0, size - 1);
        const int cy = rng.next_int(0, size - 1);
        const int r = rng.next_int(size / 24, size / 5);
        const int x0 = std::max(0, cx - r), x1 = std::min(size - 1, cx + r);
        const int y0 = std::max(0, cy - r), y1 = std::min(size - 1, cy + r);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                if (circle) {
                    const long dx = x - cx, dy = y - cy;
                    if (dx * dx + dy * dy > static_cast<long>(r) * r) continue;
                }
                img.at(x, y, 0) = clamp_u8(col.r);
                img.at(x, y, 1) = clamp_u8(col.g);
                img.at(x, y, 2) = clamp_u8(col.b);
            }
        }
    }
    // Grain over the flat fills; keeps local activity nonzero everywhere.
    const std::uint64_t gs = rng.next_u64();
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const float g =
                12.0f * (value_noise_at(gs, 0, static_cast<float>(x), static_cast<float>(y), 2.0f) -
                         0.5f);
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = clamp_u8(static_cast<double>(img.at(x, y, c)) + g);
        }
    }
    remap_full_range(img);
    return img;
}

inline Image gen_fractal(std::uint64_t seed, int size) {
    Rng rng(seed);
    const std::uint64_t s0 = rng.next_u64();
    const Rgb pal0 = random_color(rng), pal1 = random_color(rng), pal2 = random_color(rng);
    const float base = static_cast<float>(size) / 3.0f;
    Image img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const float v =
                fbm(s0, static_cast<float>(x), static_cast<float>(y), base, 9, 0.6f, true);
            // Two-segment palette.
            Rgb c{};
            if (v < 0.5f) {
                const float t = v * 2.0f;
                c = {pal0.r + t * (pal1.r - pal0.r), pal0.g + t * (pal1.g - pal0.g),
                     pal0.b + t * (pal1.b - pal0.b)};
            } else {
                const float t = (v - 0.5f) * 2.0f;
                c = {pal1.r + t * (pal2.r - pal1.r), pal1.g + t * (pal2.g - pal1.g),
                     pal1.b + t * (pal2.b - pal1.b)};
            }
            img.at(x, y, 0) = clamp_u8(c.r);
            img.at(x, y, 1) = clamp_u8(c.g);
            img.at(x, y, 2) = clamp_u8(c.b);
        }
    }
    remap_full_range(img);
    return img;
}

inline Image gen_mixed(std::uint64_t seed, int size) {
    Rng rng(seed);
    Image img = gen_gradient(rng.next_u64(), size);
    const std::uint64_t s0 = rng.next_u64();
    const float base = static_cast<float>(size) / 6.0f;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const float v =
                80.0f * (fbm(s0, static_cast<float>(x), static_cast<float>(y), base, 7, 0.6f,
                             false) -
                         0.5f);
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = clamp_u8(static_cast<double>(img.at(x, y, c)) + v);
        }
    }
    // A few translucent rectangles for hard edges.
    const int shapes = rng.next_int(6, 14);
    for (int s = 0; s < shapes; ++s) {
        const Rgb col = random_color(rng);
        const int x0 = rng.next_int(0, size - 2);
        const int y0 = rng.next_int(0, size - 2);
        const int x1 = std::min(size - 1, x0 + rng.next_int(size / 16, size / 4));
        const int y1 = std::min(size - 1, y0 + rng.next_int(size / 16, size / 4));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                for (int c = 0; c < 3; ++c) {
                    const float cv = (c == 0 ? col.r : c == 1 ? col.g : col.b);
                    img.at(x, y, c) = clamp_u8(0.55 * img.at(x, y, c) + 0.45 * cv);
                }
            }
        }
    }
    remap_full_range(img);
    return img;
}

}  // namespace detail

inline Image generate_image(GeneratorKind kind, std::uint64_t seed, int size) {
    if (size < kMinImageSize)
        throw std::invalid_argument("generate_image: size must be at least 64");
    switch (kind) {
        case GeneratorKind::gradient: return detail::gen_gradient(seed, size);
        case GeneratorKind::value_noise: return detail::gen_value_noise(seed, size);
        case GeneratorKind::geometric: return detail::gen_geometric(seed, size);
        case GeneratorKind::fractal: return detail::gen_fractal(seed, size);
        case GeneratorKind::mixed: return detail::gen_mixed(seed, size);
    }
    throw std::invalid_argument("generate_image: unknown kind");
}

// Round-robin over the five kinds in declaration order; per-image seed is
// derive_seed(master_seed, index).
inline CorpusRecord corpus_record(std::uint64_t master_seed, std::uint64_t index) {
    CorpusRecord rec;
    rec.index = index;
    rec.kind = static_cast<GeneratorKind>(index % kGeneratorKindCount);
    rec.seed = derive_seed(master_seed, index);
    return rec;
}

inline Image generate_image(const CorpusRecord& rec, int size) {
    return generate_image(rec.kind, rec.seed, size);
}

inline std::vector<std::pair<Image, CorpusRecord>> generate_corpus(std::uint64_t master_seed,
                                                                   int count, int size) {
    if (count < 1) throw std::invalid_argument("generate_corpus: count must be positive");
    if (size < kMinImageSize)
        throw std::invalid_argument("generate_corpus: size must be at least 64");
    std::vector<std::pair<Image, CorpusRecord>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const CorpusRecord rec = corpus_record(master_seed, static_cast<std::uint64_t>(i));
        out.emplace_back(generate_image(rec, size), rec);
    }
    return out;
}

// Pooled standard deviation over all RGB samples, in gray levels.
inline double sample_stddev(const Image& img) {
    double sum = 0.0, sq = 0.0;
    for (std::uint8_t v : img.pixels) {
        sum += v;
        sq += static_cast<double>(v) * v;
    }
    const double n = static_cast<double>(img.pixels.size());
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sq / n - mean * mean));
}

}  // namespace xprov
