// Manifest transport inside PNG and JPEG files, done by pure byte surgery so
// pixel data is never re-encoded.
//
//   PNG : one "cpMf" chunk (ancillary, private, safe-to-copy) holding the
//         whole envelope, inserted immediately before IEND.
//   JPEG: APP11 segments after the APP0/APP1 run that follows SOI; each
//         payload is "XLAM" + seq index + total count + <= 65,000 bytes.
//
// The exclusion hash is SHA-256 over the manifest-stripped bytes, so a file's
// hard binding is invariant under attaching or stripping its own manifest.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "xprov/codec.hpp"
#include "xprov/image.hpp"
#include "xprov/manifest.hpp"

namespace xprov {

class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class AssetFormat { png, jpeg };

struct AssetFile {
    AssetFormat format = AssetFormat::png;
    std::vector<std::uint8_t> bytes;
};

enum class ManifestTemplate { honest, misleading };

inline constexpr std::size_t kJpegChunkMax = 65000;
inline constexpr std::size_t kEnvelopeMax = 255 * kJpegChunkMax;
inline constexpr char kPngManifestChunk[4] = {'c', 'p', 'M', 'f'};
inline constexpr char kJpegManifestMagic[4] = {'X', 'L', 'A', 'M'};

namespace detail {

inline const std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

inline std::uint32_t read_be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

inline void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

struct PngChunk {
    std::size_t offset;  // of the length field
    std::size_t size;    // whole chunk: 12 + data length
    char type[5];
    std::size_t data_offset;
    std::uint32_t data_len;
};

inline std::vector<PngChunk> walk_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0)
        throw StructuralError("not a PNG file");
    std::vector<PngChunk> chunks;
    std::size_t pos = 8;
    while (pos + 12 <= bytes.size()) {
        PngChunk c{};
        c.offset = pos;
        c.data_len = read_be32(&bytes[pos]);
        c.size = 12 + static_cast<std::size_t>(c.data_len);
        if (pos + c.size > bytes.size()) throw StructuralError("truncated PNG chunk");
        std::memcpy(c.type, &bytes[pos + 4], 4);
        c.type[4] = '\0';
        c.data_offset = pos + 8;
        chunks.push_back(c);
        pos += c.size;
        if (std::memcmp(c.type, "IEND", 4) == 0) return chunks;
    }
    throw StructuralError("PNG missing IEND");
}

struct JpegSegment {
    std::size_t offset;  // of the 0xFF byte
    std::size_t size;    // marker + length + payload
    std::uint8_t marker;
    std::size_t payload_offset;  // after the 2 length bytes
    std::size_t payload_len;
};

// Header-region segments only; stops at SOS (entropy data follows) or EOI.
inline std::vector<JpegSegment> walk_jpeg(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 0xFF || bytes[1] != 0xD8)
        throw StructuralError("not a JPEG file");
    std::vector<JpegSegment> segs;
    std::size_t pos = 2;
    while (pos + 1 < bytes.size()) {
        if (bytes[pos] != 0xFF) throw StructuralError("JPEG marker expected");
        std::size_t mpos = pos;
        while (mpos + 1 < bytes.size() && bytes[mpos + 1] == 0xFF) ++mpos;  // fill bytes
        if (mpos + 1 >= bytes.size()) throw StructuralError("truncated JPEG");
        const std::uint8_t marker = bytes[mpos + 1];
        if (marker == 0xD9 || marker == 0xDA) return segs;  // EOI / SOS
        if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
            pos = mpos + 2;  // standalone marker
            continue;
        }
        if (mpos + 4 > bytes.size()) throw StructuralError("truncated JPEG segment");
        const std::size_t len = (static_cast<std::size_t>(bytes[mpos + 2]) << 8) | bytes[mpos + 3];
        if (len < 2 || mpos + 2 + len > bytes.size())
            throw StructuralError("bad JPEG segment length");
        JpegSegment s{};
        s.offset = pos;
        s.size = (mpos - pos) + 2 + len;
        s.marker = marker;
        s.payload_offset = mpos + 4;
        s.payload_len = len - 2;
        segs.push_back(s);
        pos = mpos + 2 + len;
    }
    throw StructuralError("JPEG missing SOS/EOI");
}

inline bool is_manifest_segment(const std::vector<std::uint8_t>& bytes, const JpegSegment& s) {
    return s.marker == 0xEB && s.payload_len >= 6 &&
           std::memcmp(&bytes[s.payload_offset], kJpegManifestMagic, 4) == 0;
}

}  // namespace detail

inline AssetFile asset_from_bytes(std::vector<std::uint8_t> bytes) {
    AssetFile f;
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), detail::kPngSignature, 8) == 0)
        f.format = AssetFormat::png;
    else if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8)
        f.format = AssetFormat::jpeg;
    else
        throw StructuralError("unrecognized file format (expected PNG or JPEG)");
    f.bytes = std::move(bytes);
    return f;
}

inline std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

inline void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write: " + path);
}

inline AssetFile load_asset(const std::string& path) {
    return asset_from_bytes(read_binary_file(path));
}

inline bool has_manifest(const AssetFile& file) {
    if (file.format == AssetFormat::png) {
        for (const auto& c : detail::walk_png(file.bytes))
            if (std::memcmp(c.type, kPngManifestChunk, 4) == 0) return true;
        return false;
    }
    for (const auto& s : detail::walk_jpeg(file.bytes))
        if (detail::is_manifest_segment(file.bytes, s)) return true;
    return false;
}

inline AssetFile attach_manifest(const AssetFile& file, const std::vector<std::uint8_t>& envelope) {
    if (envelope.size() > kEnvelopeMax)
        throw std::invalid_argument("attach_manifest: envelope exceeds 255x65000 bytes");
    if (has_manifest(file)) throw std::invalid_argument("attach_manifest: envelope already present");

    AssetFile out;
    out.format = file.format;

    if (file.format == AssetFormat::png) {
        const auto chunks = detail::walk_png(file.bytes);
        const auto& iend = chunks.back();
        out.bytes.reserve(file.bytes.size() + envelope.size() + 12);
        out.bytes.assign(file.bytes.begin(), file.bytes.begin() + static_cast<long>(iend.offset));
        detail::push_be32(out.bytes, static_cast<std::uint32_t>(envelope.size()));
        const std::size_t type_at = out.bytes.size();
        out.bytes.insert(out.bytes.end(), kPngManifestChunk, kPngManifestChunk + 4);
        out.bytes.insert(out.bytes.end(), envelope.begin(), envelope.end());
        const auto crc = static_cast<std::uint32_t>(
            crc32(0L, &out.bytes[type_at], static_cast<uInt>(4 + envelope.size())));
        detail::push_be32(out.bytes, crc);
        out.bytes.insert(out.bytes.end(), file.bytes.begin() + static_cast<long>(iend.offset),
                         file.bytes.end());
        return out;
    }

    // JPEG: insertion point is after the contiguous APP0/APP1 run at the top.
    const auto segs = detail::walk_jpeg(file.bytes);
    std::size_t insert_at = 2;
    for (const auto& s : segs) {
        if (s.offset == insert_at && (s.marker == 0xE0 || s.marker == 0xE1))
            insert_at = s.offset + s.size;
        else
            break;
    }
    const std::size_t nseg = envelope.empty() ? 1 : (envelope.size() + kJpegChunkMax - 1) / kJpegChunkMax;
    out.bytes.assign(file.bytes.begin(), file.bytes.begin() + static_cast<long>(insert_at));
    for (std::size_t i = 0; i < nseg; ++i) {
        const std::size_t lo = i * kJpegChunkMax;
        const std::size_t hi = std::min(envelope.size(), lo + kJpegChunkMax);
        const std::size_t chunk = hi - lo;
        out.bytes.push_back(0xFF);
        out.bytes.push_back(0xEB);
        const std::size_t len = 2 + 6 + chunk;
        out.bytes.push_back(static_cast<std::uint8_t>(len >> 8));
        out.bytes.push_back(static_cast<std::uint8_t>(len & 0xFF));
        out.bytes.insert(out.bytes.end(), kJpegManifestMagic, kJpegManifestMagic + 4);
        out.bytes.push_back(static_cast<std::uint8_t>(i));
        out.bytes.push_back(static_cast<std::uint8_t>(nseg));
        out.bytes.insert(out.bytes.end(), envelope.begin() + static_cast<long>(lo),
                         envelope.begin() + static_cast<long>(hi));
    }
    out.bytes.insert(out.bytes.end(), file.bytes.begin() + static_cast<long>(insert_at),
                     file.bytes.end());
    return out;
}

// nullopt when the file was never signed; StructuralError on gaps, duplicate
// indices, or inconsistent counts.
inline std::optional<std::vector<std::uint8_t>> extract_manifest(const AssetFile& file) {
    if (file.format == AssetFormat::png) {
        std::optional<std::vector<std::uint8_t>> envelope;
        for (const auto& c : detail::walk_png(file.bytes)) {
            if (std::memcmp(c.type, kPngManifestChunk, 4) != 0) continue;
            if (envelope) throw StructuralError("multiple manifest chunks");
            envelope.emplace(file.bytes.begin() + static_cast<long>(c.data_offset),
                             file.bytes.begin() + static_cast<long>(c.data_offset + c.data_len));
        }
        return envelope;
    }

    struct Part {
        std::uint8_t index;
        std::uint8_t count;
        std::vector<std::uint8_t> data;
    };
    std::vector<Part> parts;
    for (const auto& s : detail::walk_jpeg(file.bytes)) {
        if (!detail::is_manifest_segment(file.bytes, s)) continue;
        Part p;
        p.index = file.bytes[s.payload_offset + 4];
        p.count = file.bytes[s.payload_offset + 5];
        p.data.assign(file.bytes.begin() + static_cast<long>(s.payload_offset + 6),
                      file.bytes.begin() + static_cast<long>(s.payload_offset + s.payload_len));
        parts.push_back(std::move(p));
    }
    if (parts.empty()) return std::nullopt;

    const std::uint8_t count = parts.front().count;
    if (count == 0 || parts.size() != count)
        throw StructuralError("manifest segment count mismatch");
    std::vector<const Part*> ordered(count, nullptr);
    for (const auto& p : parts) {
        if (p.count != count) throw StructuralError("inconsistent manifest segment totals");
        if (p.index >= count || ordered[p.index]) throw StructuralError("bad manifest segment index");
        ordered[p.index] = &p;
    }
    std::vector<std::uint8_t> envelope;
    for (const Part* p : ordered)
        envelope.insert(envelope.end(), p->data.begin(), p->data.end());
    return envelope;
}

inline AssetFile strip_manifest(const AssetFile& file) {
    AssetFile out;
    out.format = file.format;
    if (file.format == AssetFormat::png) {
        const auto chunks = detail::walk_png(file.bytes);
        out.bytes.reserve(file.bytes.size());
        out.bytes.assign(file.bytes.begin(), file.bytes.begin() + 8);
        for (const auto& c : chunks) {
            if (std::memcmp(c.type, kPngManifestChunk, 4) == 0) continue;
            out.bytes.insert(out.bytes.end(), file.bytes.begin() + static_cast<long>(c.offset),
                             file.bytes.begin() + static_cast<long>(c.offset + c.size));
        }
        return out;
    }
    const auto segs = detail::walk_jpeg(file.bytes);
    out.bytes.reserve(file.bytes.size());
    std::size_t pos = 0;
    for (const auto& s : segs) {
        if (!detail::is_manifest_segment(file.bytes, s)) continue;
        out.bytes.insert(out.bytes.end(), file.bytes.begin() + static_cast<long>(pos),
                         file.bytes.begin() + static_cast<long>(s.offset));
        pos = s.offset + s.size;
    }
    out.bytes.insert(out.bytes.end(), file.bytes.begin() + static_cast<long>(pos),
                     file.bytes.end());
    return out;
}

inline std::string exclusion_hash(const AssetFile& file) {
    return sha256_hex(strip_manifest(file).bytes);
}

inline Image decode_pixels(const AssetFile& file) {
    return file.format == AssetFormat::png ? png_decode(file.bytes) : jpeg_decode(file.bytes);
}

// exclusion_hash -> claim template -> sign -> attach. The output verifies as
// valid against the chain's root because the hash ignores the envelope itself.
inline AssetFile sign_and_attach(const AssetFile& file, ManifestTemplate tmpl,
                                 const CertChain& chain, const std::string& signed_at) {
    const std::string hash = exclusion_hash(file);
    const Claim claim = tmpl == ManifestTemplate::honest ? make_honest_claim(hash, signed_at)
                                                         : make_misleading_claim(hash, signed_at);
    const SignedManifest manifest = sign(claim, chain);
    return attach_manifest(file, to_envelope(manifest));
}

}  // namespace xprov
