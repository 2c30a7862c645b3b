#include "uiattest/image_io.hpp"
#include "uiattest/errors.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace uiattest {

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + p.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

struct PngReadCtx {
    const std::uint8_t* data;
    size_t size;
    size_t off;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->off + n > ctx->size)
        png_error(png, "truncated png");
    std::memcpy(out, ctx->data + ctx->off, n);
    ctx->off += n;
}

const std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

} // namespace

Frame load_png(const std::filesystem::path& p) {
    auto bytes = read_all(p);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        throw ParseError("not a png: " + p.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> px;
    int w = 0, h = 0;
    PngReadCtx ctx{bytes.data(), bytes.size(), 0};

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("malformed png: " + p.string());
    }

    png_set_read_fn(png, &ctx, png_read_fn);
    png_read_info(png, info);

    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    int depth = png_get_bit_depth(png, info);
    int color = png_get_color_type(png, info);

    if (depth != 8 || (color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_RGB_ALPHA)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png must be 8-bit RGB or RGBA: " + p.string());
    }
    if (color == PNG_COLOR_TYPE_RGB_ALPHA)
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    px.resize(static_cast<size_t>(w) * h * 3);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = px.data() + static_cast<size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    return Frame(w, h, std::move(px));
}

void save_png(const Frame& f, const std::filesystem::path& p) {
    std::FILE* fp = std::fopen(p.string().c_str(), "wb");
    if (!fp)
        throw IoError("cannot write " + p.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw std::runtime_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("png write failed: " + p.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, f.width(), f.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(f.height());
    for (int y = 0; y < f.height(); ++y)
        rows[y] = const_cast<png_bytep>(f.at(0, y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

Frame load_raw(const std::filesystem::path& p) {
    auto bytes = read_all(p);
    if (bytes.size() < 8)
        throw ParseError("raw frame header truncated: " + p.string());
    auto be32 = [&](size_t off) {
        return (static_cast<std::uint32_t>(bytes[off]) << 24) |
               (static_cast<std::uint32_t>(bytes[off + 1]) << 16) |
               (static_cast<std::uint32_t>(bytes[off + 2]) << 8) |
               static_cast<std::uint32_t>(bytes[off + 3]);
    };
    std::uint32_t w = be32(0), h = be32(4);
    if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16)
        throw ParseError("raw frame has invalid dimensions: " + p.string());
    size_t need = static_cast<size_t>(w) * h * 3;
    if (bytes.size() != 8 + need)
        throw ParseError("raw frame payload size mismatch: " + p.string());
    std::vector<std::uint8_t> px(bytes.begin() + 8, bytes.end());
    return Frame(static_cast<int>(w), static_cast<int>(h), std::move(px));
}

void save_raw(const Frame& f, const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + p.string());
    std::uint8_t hdr[8] = {
        static_cast<std::uint8_t>(f.width() >> 24), static_cast<std::uint8_t>(f.width() >> 16),
        static_cast<std::uint8_t>(f.width() >> 8),  static_cast<std::uint8_t>(f.width()),
        static_cast<std::uint8_t>(f.height() >> 24), static_cast<std::uint8_t>(f.height() >> 16),
        static_cast<std::uint8_t>(f.height() >> 8),  static_cast<std::uint8_t>(f.height())};
    out.write(reinterpret_cast<const char*>(hdr), 8);
    out.write(reinterpret_cast<const char*>(f.pixels().data()),
              static_cast<std::streamsize>(f.pixels().size()));
    if (!out)
        throw IoError("short write: " + p.string());
}

Frame load_frame(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + p.string());
    std::uint8_t sig[8] = {0};
    in.read(reinterpret_cast<char*>(sig), 8);
    in.close();
    if (std::memcmp(sig, kPngSig, 8) == 0)
        return load_png(p);
    return load_raw(p);
}

} // namespace uiattest
