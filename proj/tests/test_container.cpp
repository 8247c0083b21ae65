#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <xprov/codec.hpp>
#include <xprov/container.hpp>
#include <xprov/corpus.hpp>

using namespace xprov;

namespace {

AssetFile png_fixture() {
    return asset_from_bytes(png_encode(generate_image(GeneratorKind::geometric, 41, 96)));
}

AssetFile jpeg_fixture() {
    return asset_from_bytes(jpeg_encode(generate_image(GeneratorKind::geometric, 41, 96), 90));
}

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

// Offsets of every APP11 manifest segment in a JPEG byte stream.
std::vector<std::size_t> manifest_segment_offsets(const std::vector<std::uint8_t>& b) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + 9 < b.size(); ++i)
        if (b[i] == 0xFF && b[i + 1] == 0xEB && std::memcmp(&b[i + 4], "XLAM", 4) == 0)
            out.push_back(i);
    return out;
}

}  // namespace

TEST_CASE("format sniffing recognizes png and jpeg") {
    CHECK(png_fixture().format == AssetFormat::png);
    CHECK(jpeg_fixture().format == AssetFormat::jpeg);
    CHECK_THROWS_AS(asset_from_bytes({1, 2, 3}), StructuralError);
}

TEST_CASE("attach and extract round-trip the envelope") {
    const auto envelope = bytes_of("a small provenance envelope");
    for (const AssetFile& f : {png_fixture(), jpeg_fixture()}) {
        CHECK_FALSE(extract_manifest(f).has_value());
        const AssetFile signed_file = attach_manifest(f, envelope);
        const auto back = extract_manifest(signed_file);
        REQUIRE(back.has_value());
        CHECK(*back == envelope);
    }
}

TEST_CASE("strip is the exact inverse of attach and is idempotent") {
    const auto envelope = bytes_of("payload");
    for (const AssetFile& f : {png_fixture(), jpeg_fixture()}) {
        const AssetFile attached = attach_manifest(f, envelope);
        CHECK(strip_manifest(attached).bytes == f.bytes);
        CHECK(strip_manifest(f).bytes == f.bytes);  // no-op on unsigned files
        CHECK(strip_manifest(strip_manifest(attached)).bytes == f.bytes);
    }
}

TEST_CASE("attach refuses a second envelope") {
    const auto envelope = bytes_of("x");
    for (const AssetFile& f : {png_fixture(), jpeg_fixture()}) {
        const AssetFile once = attach_manifest(f, envelope);
        CHECK_THROWS_AS(attach_manifest(once, envelope), std::invalid_argument);
    }
}

TEST_CASE("attach enforces the envelope size ceiling") {
    const std::vector<std::uint8_t> huge(kEnvelopeMax + 1, 0x00);
    CHECK_THROWS_AS(attach_manifest(png_fixture(), huge), std::invalid_argument);
    CHECK_THROWS_AS(attach_manifest(jpeg_fixture(), huge), std::invalid_argument);
}

TEST_CASE("empty envelopes round-trip as empty, distinct from absent") {
    for (const AssetFile& f : {png_fixture(), jpeg_fixture()}) {
        const auto back = extract_manifest(attach_manifest(f, {}));
        REQUIRE(back.has_value());
        CHECK(back->empty());
    }
}

TEST_CASE("png framing is bit-exact") {
    const AssetFile f = png_fixture();
    const AssetFile attached = attach_manifest(f, bytes_of("hello"));
    // The chunk sits immediately before IEND: length 5, type cpMf, payload
    // "hello", then the frozen CRC-32 of "cpMfhello".
    const std::vector<std::uint8_t> expected{0x00, 0x00, 0x00, 0x05, 'c',  'p',  'M', 'f', 'h',
                                             'e',  'l',  'l',  'o',  0x24, 0xF4, 0x91, 0x3A};
    const std::size_t iend = attached.bytes.size() - 12;  // 12-byte IEND chunk
    REQUIRE(std::memcmp(&attached.bytes[iend + 4], "IEND", 4) == 0);
    const std::size_t chunk_at = iend - expected.size();
    CHECK(std::memcmp(&attached.bytes[chunk_at], expected.data(), expected.size()) == 0);
}

TEST_CASE("jpeg framing is bit-exact") {
    const AssetFile f = jpeg_fixture();
    const AssetFile attached = attach_manifest(f, bytes_of("hello"));
    const auto offs = manifest_segment_offsets(attached.bytes);
    REQUIRE(offs.size() == 1u);
    // FF EB, length 13 (2 length + 4 magic + idx + total + 5 payload), XLAM, 0, 1, "hello"
    const std::vector<std::uint8_t> expected{0xFF, 0xEB, 0x00, 0x0D, 'X', 'L', 'A', 'M',
                                             0x00, 0x01, 'h',  'e',  'l', 'l', 'o'};
    CHECK(std::memcmp(&attached.bytes[offs[0]], expected.data(), expected.size()) == 0);
}

TEST_CASE("large jpeg envelopes split into numbered segments") {
    std::vector<std::uint8_t> big(130000);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<std::uint8_t>(i * 31 + 7);

    const AssetFile attached = attach_manifest(jpeg_fixture(), big);
    const auto offs = manifest_segment_offsets(attached.bytes);
    REQUIRE(offs.size() == 2u);
    // Sequence bytes (index, total): (0, 2) then (1, 2).
    CHECK(attached.bytes[offs[0] + 8] == 0);
    CHECK(attached.bytes[offs[0] + 9] == 2);
    CHECK(attached.bytes[offs[1] + 8] == 1);
    CHECK(attached.bytes[offs[1] + 9] == 2);

    const auto back = extract_manifest(attached);
    REQUIRE(back.has_value());
    CHECK(*back == big);
}

TEST_CASE("segment surgery raises structural errors, never silent absence") {
    std::vector<std::uint8_t> big(130000, 0x55);
    const AssetFile attached = attach_manifest(jpeg_fixture(), big);
    const auto offs = manifest_segment_offsets(attached.bytes);
    REQUIRE(offs.size() == 2u);

    SECTION("deleted segment") {
        AssetFile damaged = attached;
        const std::size_t len =
            (static_cast<std::size_t>(damaged.bytes[offs[1] + 2]) << 8) | damaged.bytes[offs[1] + 3];
        damaged.bytes.erase(damaged.bytes.begin() + static_cast<long>(offs[1]),
                            damaged.bytes.begin() + static_cast<long>(offs[1] + 2 + len));
        CHECK_THROWS_AS(extract_manifest(damaged), StructuralError);
    }
    SECTION("duplicate index") {
        AssetFile damaged = attached;
        damaged.bytes[offs[1] + 8] = 0;  // second segment claims index 0
        CHECK_THROWS_AS(extract_manifest(damaged), StructuralError);
    }
    SECTION("inconsistent totals") {
        AssetFile damaged = attached;
        damaged.bytes[offs[1] + 9] = 3;
        CHECK_THROWS_AS(extract_manifest(damaged), StructuralError);
    }
}

TEST_CASE("duplicate png manifest chunks are a structural error") {
    const auto envelope = bytes_of("dup");
    const AssetFile once = attach_manifest(png_fixture(), envelope);
    // Find the cpMf chunk span and splice in a second copy before it.
    const std::string hay(once.bytes.begin(), once.bytes.end());
    const std::size_t type_at = hay.find("cpMf");
    REQUIRE(type_at != std::string::npos);
    const std::size_t chunk_at = type_at - 4;
    const std::size_t chunk_len = 12 + envelope.size();
    AssetFile twice = once;
    twice.bytes.insert(twice.bytes.begin() + static_cast<long>(chunk_at),
                       once.bytes.begin() + static_cast<long>(chunk_at),
                       once.bytes.begin() + static_cast<long>(chunk_at + chunk_len));
    CHECK_THROWS_AS(extract_manifest(twice), StructuralError);
}

TEST_CASE("attaching a manifest never touches the pixels") {
    const auto envelope = bytes_of("metadata only");
    for (const AssetFile& f : {png_fixture(), jpeg_fixture()}) {
        const Image before = decode_pixels(f);
        const Image after = decode_pixels(attach_manifest(f, envelope));
        CHECK(before == after);
    }
}

TEST_CASE("exclusion hash ignores the envelope") {
    const auto envelope = bytes_of("whatever");
    for (const AssetFile& f : {png_fixture(), jpeg_fixture()}) {
        const AssetFile attached = attach_manifest(f, envelope);
        CHECK(exclusion_hash(f) == exclusion_hash(attached));
        CHECK(exclusion_hash(strip_manifest(attached)) == exclusion_hash(f));
        // Unsigned file: exclusion hash is the plain digest of the bytes.
        CHECK(exclusion_hash(f) == sha256_hex(f.bytes));
    }
}

TEST_CASE("pixel-region byte changes move the exclusion hash") {
    AssetFile f = png_fixture();
    const std::string before = exclusion_hash(f);
    f.bytes[f.bytes.size() / 2] ^= 0x10;  // inside IDAT
    CHECK(exclusion_hash(f) != before);
}

TEST_CASE("sign_and_attach produces a verifiable manifest") {
    const CertChain chain = generate_cert_chain("Container Signer");
    const TrustStore store = TrustStore{}.with_root(chain.root_der);
    const std::string when = "2026-01-05T12:00:00Z";

    for (const AssetFile& f : {png_fixture(), jpeg_fixture()}) {
        const AssetFile honest = sign_and_attach(f, ManifestTemplate::honest, chain, when);
        const AssetFile misleading = sign_and_attach(f, ManifestTemplate::misleading, chain, when);

        for (const AssetFile* s : {&honest, &misleading}) {
            const auto env = extract_manifest(*s);
            REQUIRE(env.has_value());
            const auto [status, claim] = verify_envelope(*env, exclusion_hash(*s), store);
            CHECK(status == ManifestStatus::valid_trusted);
            REQUIRE(claim.has_value());
        }

        // Same input, both templates: the files differ only in envelope bytes.
        CHECK(strip_manifest(honest).bytes == strip_manifest(misleading).bytes);
        CHECK(strip_manifest(honest).bytes == f.bytes);
        CHECK(honest.bytes != misleading.bytes);

        const auto claim_h = verify_envelope(*extract_manifest(honest), exclusion_hash(honest),
                                             store).second;
        const auto claim_m = verify_envelope(*extract_manifest(misleading),
                                             exclusion_hash(misleading), store).second;
        CHECK(claim_h->digital_source_type.has_value());
        CHECK_FALSE(claim_m->digital_source_type.has_value());
    }
}

TEST_CASE("file io helpers round-trip bytes") {
    const auto tmp = std::filesystem::temp_directory_path() / "xprov_io_test.bin";
    const std::vector<std::uint8_t> data{0, 1, 2, 254, 255, 10, 13, 26};
    write_binary_file(tmp.string(), data);
    CHECK(read_binary_file(tmp.string()) == data);
    std::filesystem::remove(tmp);
    CHECK_THROWS_AS(read_binary_file((tmp / "missing").string()), std::runtime_error);
}
