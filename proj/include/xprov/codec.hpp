// In-memory PNG and baseline JPEG pixel codecs, backed by libpng and libjpeg.
// JPEG quality follows the library's scaled Annex-K quantization tables
// (jpeg_set_quality with force_baseline), which is the de facto meaning of
// "quality N" on the web.
#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "xprov/image.hpp"

namespace xprov {

class CodecError : public std::runtime_error {
public:
    explicit CodecError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

struct PngReadState {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_read_cb(png_structp png, png_bytep out, png_size_t len) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + len > st->size) {
        png_error(png, "read past end of PNG buffer");
        return;
    }
    std::memcpy(out, st->data + st->pos, len);
    st->pos += len;
}

inline void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

inline void png_flush_cb(png_structp) {}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit_cb(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

}  // namespace detail

inline Image png_decode(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw CodecError("png_decode: not a PNG stream");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw CodecError("png_decode: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw CodecError("png_decode: allocation failure");
    }

    detail::PngReadState state{bytes.data(), bytes.size(), 0};
    Image img;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw CodecError("png_decode: corrupt PNG stream");
    }

    png_set_read_fn(png, &state, detail::png_read_cb);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    // Normalize everything to 8-bit RGB.
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.assign(static_cast<std::size_t>(w) * h * 3, 0);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w * 3;

    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// compression_level and filter choice are pinned by the caller so encodes are
// reproducible; level 6 with default filtering is the library default.
inline std::vector<std::uint8_t> png_encode(const Image& img, int compression_level = 6,
                                            bool filter_none = false) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * 3)
        throw CodecError("png_encode: malformed image");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw CodecError("png_encode: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw CodecError("png_encode: allocation failure");
    }

    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(img.pixels.data() +
                                        static_cast<std::size_t>(y) * img.width * 3);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw CodecError("png_encode: write failure");
    }

    png_set_write_fn(png, &out, detail::png_write_cb, detail::png_flush_cb);
    png_set_compression_level(png, compression_level);
    if (filter_none) png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

inline Image jpeg_decode(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 0xFF || bytes[1] != 0xD8)
        throw CodecError("jpeg_decode: not a JPEG stream");

    jpeg_decompress_struct cinfo;
    detail::JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = detail::jpeg_error_exit_cb;

    Image img;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw CodecError(std::string("jpeg_decode: ") + err.message);
    }

    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    img.width = static_cast<int>(cinfo.output_width);
    img.height = static_cast<int>(cinfo.output_height);
    img.pixels.assign(static_cast<std::size_t>(img.width) * img.height * 3, 0);

    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.pixels.data() +
                       static_cast<std::size_t>(cinfo.output_scanline) * img.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

inline std::vector<std::uint8_t> jpeg_encode(const Image& img, int quality) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * 3)
        throw CodecError("jpeg_encode: malformed image");
    if (quality < 1 || quality > 100) throw CodecError("jpeg_encode: quality out of range");

    jpeg_compress_struct cinfo;
    detail::JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = detail::jpeg_error_exit_cb;

    unsigned char* mem = nullptr;
    unsigned long mem_size = 0;
    std::vector<std::uint8_t> out;

    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        if (mem) free(mem);
        throw CodecError(std::string("jpeg_encode: ") + err.message);
    }

    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &mem, &mem_size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE /* force baseline */);
    jpeg_start_compress(&cinfo, TRUE);

    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(
            img.pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);

    out.assign(mem, mem + mem_size);
    free(mem);
    return out;
}

}  // namespace xprov
