// Spread-spectrum pixel watermark carrying a fixed 256-bit payload.
//
// The canonical 512x512 plane is tiled into 2x2-pixel cells; cells are dealt
// pseudorandomly and evenly to the 256 payload bits (1024 pixels per bit) and
// each cell carries a keyed +/-1 sign. Embedding adds the bit-signed field to
// luminance, scaled by a local-activity mask; detection correlates a high-pass
// residual against the field over each bit's support, searching a small set of
// centered crop-scale hypotheses for synchronization.
#pragma once

#include <bitset>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "xprov/image.hpp"
#include "xprov/rng.hpp"

namespace xprov {

inline constexpr int kPayloadBits = 256;
inline constexpr int kCanonicalSize = 512;

struct Payload {
    std::bitset<kPayloadBits> bits;

    friend bool operator==(const Payload& a, const Payload& b) { return a.bits == b.bits; }
};

// 64 hex chars, big-endian bit order within bytes: bit 8j+k is bit (7-k) of
// byte j, byte 0 first.
inline std::string payload_to_hex(const Payload& p) {
    static const char* digits = "0123456789abcdef";
    std::string s(64, '0');
    for (int j = 0; j < 32; ++j) {
        unsigned byte = 0;
        for (int k = 0; k < 8; ++k)
            byte = (byte << 1) | static_cast<unsigned>(p.bits[8 * j + k]);
        s[2 * j] = digits[byte >> 4];
        s[2 * j + 1] = digits[byte & 0xF];
    }
    return s;
}

inline Payload payload_from_hex(const std::string& hex) {
    if (hex.size() != 64)
        throw std::invalid_argument("payload_from_hex: expected 64 hex characters");
    auto nibble = [](char c) -> unsigned {
        if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
        throw std::invalid_argument("payload_from_hex: invalid hex character");
    };
    Payload p;
    for (int j = 0; j < 32; ++j) {
        const unsigned byte = (nibble(hex[2 * j]) << 4) | nibble(hex[2 * j + 1]);
        for (int k = 0; k < 8; ++k) p.bits[8 * j + k] = ((byte >> (7 - k)) & 1u) != 0;
    }
    return p;
}

inline Payload random_payload(std::uint64_t seed) {
    Rng rng(seed);
    Payload p;
    for (int i = 0; i < kPayloadBits; ++i) p.bits[i] = rng.next_bool();
    return p;
}

// Fraction of positions where the two 256-bit sequences agree.
inline double bit_accuracy(const Payload& a, const Payload& b) {
    return static_cast<double>(kPayloadBits - (a.bits ^ b.bits).count()) /
           static_cast<double>(kPayloadBits);
}

// Sequence form used by callers holding raw bit vectors; both must be 256 long.
inline double bit_accuracy(const std::vector<std::uint8_t>& recovered,
                           const std::vector<std::uint8_t>& target) {
    if (recovered.size() != target.size() || recovered.size() != kPayloadBits)
        throw std::invalid_argument("bit_accuracy: sequences must both be 256 bits");
    int match = 0;
    for (std::size_t i = 0; i < recovered.size(); ++i)
        match += ((recovered[i] != 0) == (target[i] != 0));
    return static_cast<double>(match) / static_cast<double>(kPayloadBits);
}

struct WatermarkKey {
    std::uint64_t seed = 0;
};

struct EmbedConfig {
    double strength_alpha = 3.0;
    int canonical_size = kCanonicalSize;
    double detection_threshold = 0.75;
    // Centered crop-scale hypotheses searched at detection time.
    std::vector<double> sync_scales = {1.00, 0.98, 0.96, 0.94, 0.92, 0.90, 0.88, 0.86, 0.84};
};

struct DetectionResult {
    Payload recovered;
    double bit_accuracy = 0.0;
    bool detected = false;
    double best_sync_scale = 1.0;
};

// Keyed pattern field plus precomputed per-scale lookup maps. Immutable after
// derivation; share one instance across threads.
class PatternField {
public:
    int canonical = kCanonicalSize;
    int tile = 2;                          // cell edge in canonical pixels
    std::vector<std::uint8_t> tile_bit;    // tile index -> payload bit
    std::vector<std::int8_t> tile_sign;    // tile index -> +/-1
    std::vector<double> scales;            // hypothesis order as searched

    // Per scale, per canonical pixel: owning bit and carried sign.
    std::vector<std::vector<std::uint8_t>> bit_map;
    std::vector<std::vector<std::int8_t>> sign_map;

    int tiles_per_side() const { return canonical / tile; }

    int support_size(int bit) const {
        int n = 0;
        for (std::uint8_t b : tile_bit) n += (b == bit);
        return n * tile * tile;
    }

    // Bit-signed field at canonical resolution for a given payload.
    std::vector<float> modulated_field(const Payload& payload) const {
        const int n = canonical;
        const int ts = tiles_per_side();
        std::vector<float> field(static_cast<std::size_t>(n) * n);
        for (int y = 0; y < n; ++y) {
            const int ty = y / tile;
            for (int x = 0; x < n; ++x) {
                const int t = ty * ts + x / tile;
                const float s = static_cast<float>(tile_sign[t]);
                const float b = payload.bits[tile_bit[t]] ? 1.0f : -1.0f;
                field[static_cast<std::size_t>(y) * n + x] = s * b;
            }
        }
        return field;
    }
};

// Balanced pseudorandom partition: deal a keyed shuffle of all cells round-
// robin to the 256 bits, so every support holds exactly (512/2)^2/256 cells.
inline PatternField derive_patterns(const WatermarkKey& key, const EmbedConfig& cfg = {}) {
    PatternField f;
    f.canonical = cfg.canonical_size;
    f.scales = cfg.sync_scales;
    const int ts = f.tiles_per_side();
    const int tiles = ts * ts;

    std::vector<std::uint32_t> order(static_cast<std::size_t>(tiles));
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(splitmix64(key.seed ^ 0xA5C1E5ED5EEDULL));
    for (int i = tiles - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[j]);
    }
    f.tile_bit.assign(static_cast<std::size_t>(tiles), 0);
    f.tile_sign.assign(static_cast<std::size_t>(tiles), 1);
    for (int i = 0; i < tiles; ++i)
        f.tile_bit[order[static_cast<std::size_t>(i)]] =
            static_cast<std::uint8_t>(i % kPayloadBits);
    for (int t = 0; t < tiles; ++t) f.tile_sign[static_cast<std::size_t>(t)] = rng.next_bool() ? 1 : -1;

    // Scale maps: pixel (x, y) under hypothesis z shows original coordinate
    // off + (x + 0.5) z - 0.5 with off = n (1 - z) / 2; the cell label is
    // taken from the nearest source pixel.
    const int n = f.canonical;
    f.bit_map.resize(f.scales.size());
    f.sign_map.resize(f.scales.size());
    for (std::size_t zi = 0; zi < f.scales.size(); ++zi) {
        const double z = f.scales[zi];
        auto& bm = f.bit_map[zi];
        auto& sm = f.sign_map[zi];
        bm.resize(static_cast<std::size_t>(n) * n);
        sm.resize(static_cast<std::size_t>(n) * n);
        const double off = n * (1.0 - z) / 2.0;
        for (int y = 0; y < n; ++y) {
            const int sy = std::clamp(static_cast<int>(std::lround(off + (y + 0.5) * z - 0.5)), 0,
                                      n - 1);
            for (int x = 0; x < n; ++x) {
                const int sx = std::clamp(
                    static_cast<int>(std::lround(off + (x + 0.5) * z - 0.5)), 0, n - 1);
                const int t = (sy / f.tile) * ts + sx / f.tile;
                bm[static_cast<std::size_t>(y) * n + x] = f.tile_bit[t];
                sm[static_cast<std::size_t>(y) * n + x] = f.tile_sign[t];
            }
        }
    }
    return f;
}

namespace detail {

// Mean absolute difference against the 8-neighborhood, border replicated.
inline std::vector<float> local_activity(const std::vector<float>& y, int w, int h) {
    std::vector<float> act(y.size());
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    for (int py = 0; py < h; ++py) {
        for (int px = 0; px < w; ++px) {
            const float c = y[static_cast<std::size_t>(py) * w + px];
            float s = 0.0f;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = clampi(py + dy, 0, h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int xx = clampi(px + dx, 0, w - 1);
                    s += std::abs(y[static_cast<std::size_t>(yy) * w + xx] - c);
                }
            }
            act[static_cast<std::size_t>(py) * w + px] = s * (1.0f / 8.0f);
        }
    }
    return act;
}

// Activity-to-amplitude mapping, tuned on the stock corpus so that perturbed
// detections clear the threshold while PSNR stays >= 38 dB at alpha 3.
inline constexpr float kMaskFloor = 0.65f;
inline constexpr float kMaskCeil = 1.35f;
inline constexpr float kMaskBase = 0.65f;
inline constexpr float kMaskGain = 0.05f;

inline float activity_mask(float act) {
    return std::clamp(kMaskBase + kMaskGain * act, kMaskFloor, kMaskCeil);
}

}  // namespace detail

// Adds the bit-signed field to luminance (equal delta on R, G, B preserves
// chroma), modulated by local activity and clamped to [0, 255].
inline Image embed(const Image& image, const Payload& payload, const PatternField& field,
                   const EmbedConfig& cfg = {}) {
    if (image.width < 64 || image.height < 64)
        throw std::invalid_argument("embed: image must be at least 64x64");

    const auto y = luminance_plane(image);
    const auto act = detail::local_activity(y, image.width, image.height);
    auto pattern = field.modulated_field(payload);
    pattern = resize_bilinear_plane(pattern, field.canonical, field.canonical, image.width,
                                    image.height);

    Image out = image;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const double delta =
            cfg.strength_alpha * detail::activity_mask(act[i]) * pattern[i];
        const long d = std::lround(delta);
        if (d == 0) continue;
        std::uint8_t* px = &out.pixels[i * 3];
        for (int c = 0; c < 3; ++c)
            px[c] = clamp_u8(static_cast<double>(px[c]) + static_cast<double>(d));
    }
    return out;
}

inline Image embed(const Image& image, const Payload& payload, const WatermarkKey& key,
                   const EmbedConfig& cfg = {}) {
    return embed(image, payload, derive_patterns(key, cfg), cfg);
}

inline DetectionResult detect(const Image& image, const Payload& target,
                              const PatternField& field, const EmbedConfig& cfg = {}) {
    const int n = field.canonical;
    auto y = luminance_plane(image);
    const auto blur = box_blur3(y, image.width, image.height);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= blur[i];
    const auto residual = resize_bilinear_plane(y, image.width, image.height, n, n);

    std::vector<double> best_corr(kPayloadBits, 0.0);
    double best_score = -1.0;
    std::size_t best_zi = 0;
    std::vector<double> corr(kPayloadBits);
    for (std::size_t zi = 0; zi < field.scales.size(); ++zi) {
        std::fill(corr.begin(), corr.end(), 0.0);
        const auto& bm = field.bit_map[zi];
        const auto& sm = field.sign_map[zi];
        for (std::size_t i = 0; i < residual.size(); ++i)
            corr[bm[i]] += static_cast<double>(residual[i]) * sm[i];
        double mean_mag = 0.0;
        for (double c : corr) mean_mag += std::abs(c);
        mean_mag /= kPayloadBits;
        // Strictly-greater keeps the earliest (largest) scale on ties.
        if (mean_mag > best_score) {
            best_score = mean_mag;
            best_zi = zi;
            best_corr = corr;
        }
    }

    DetectionResult res;
    res.best_sync_scale = field.scales.empty() ? 1.0 : field.scales[best_zi];
    for (int i = 0; i < kPayloadBits; ++i) res.recovered.bits[i] = best_corr[i] > 0.0;
    res.bit_accuracy = bit_accuracy(res.recovered, target);
    res.detected = res.bit_accuracy > cfg.detection_threshold;
    return res;
}

inline DetectionResult detect(const Image& image, const Payload& target, const WatermarkKey& key,
                              const EmbedConfig& cfg = {}) {
    return detect(image, target, derive_patterns(key, cfg), cfg);
}

}  // namespace xprov
