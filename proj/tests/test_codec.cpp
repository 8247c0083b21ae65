#include <catch2/catch_amalgamated.hpp>

#include <xprov/codec.hpp>
#include <xprov/corpus.hpp>
#include <xprov/image.hpp>

using namespace xprov;

TEST_CASE("png encode/decode round-trips losslessly") {
    const Image img = generate_image(GeneratorKind::geometric, 5, 128);
    const auto bytes = png_encode(img);
    REQUIRE(bytes.size() > 8u);
    // PNG signature
    CHECK(bytes[0] == 0x89);
    CHECK(bytes[1] == 'P');
    const Image back = png_decode(bytes);
    CHECK(back == img);
}

TEST_CASE("png encoding is deterministic") {
    const Image img = generate_image(GeneratorKind::mixed, 9, 96);
    CHECK(png_encode(img) == png_encode(img));
}

TEST_CASE("jpeg encode/decode preserves dimensions and approximates pixels") {
    const Image img = generate_image(GeneratorKind::gradient, 4, 128);
    const auto bytes = jpeg_encode(img, 95);
    REQUIRE(bytes.size() > 4u);
    CHECK(bytes[0] == 0xFF);  // SOI
    CHECK(bytes[1] == 0xD8);
    const Image back = jpeg_decode(bytes);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    CHECK(psnr(img, back) > 30.0);
}

TEST_CASE("jpeg encoding is deterministic") {
    const Image img = generate_image(GeneratorKind::fractal, 2, 96);
    CHECK(jpeg_encode(img, 80) == jpeg_encode(img, 80));
}

TEST_CASE("lower jpeg quality gives smaller files and more loss") {
    const Image img = generate_image(GeneratorKind::value_noise, 3, 128);
    const auto hi = jpeg_encode(img, 95);
    const auto lo = jpeg_encode(img, 40);
    CHECK(lo.size() < hi.size());
    CHECK(psnr(img, jpeg_decode(lo)) < psnr(img, jpeg_decode(hi)));
}

TEST_CASE("decoders reject garbage") {
    const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK_THROWS_AS(png_decode(junk), CodecError);
    CHECK_THROWS_AS(jpeg_decode(junk), CodecError);
    CHECK_THROWS_AS(png_decode({}), CodecError);
}

TEST_CASE("truncated streams are rejected") {
    const Image img = generate_image(GeneratorKind::geometric, 8, 96);
    auto png = png_encode(img);
    png.resize(png.size() / 2);
    CHECK_THROWS_AS(png_decode(png), CodecError);
}
