#include "sfdi/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

namespace sfdi {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image8 Image8::zeros(int width, int height)
{
    Image8 img;
    img.r = Plane<std::uint8_t>::Zero(height, width);
    img.g = Plane<std::uint8_t>::Zero(height, width);
    img.b = Plane<std::uint8_t>::Zero(height, width);
    return img;
}

bool Image8::operator==(const Image8& o) const
{
    return width() == o.width() && height() == o.height() && (r == o.r).all() && (g == o.g).all() &&
           (b == o.b).all();
}

LinearImage LinearImage::zeros(int width, int height)
{
    LinearImage img;
    img.r = Map2d::Zero(height, width);
    img.g = Map2d::Zero(height, width);
    img.b = Map2d::Zero(height, width);
    return img;
}

std::uint8_t quantize(double v)
{
    if (!(v > 0.0)) {
        return 0;
    }
    return static_cast<std::uint8_t>(std::round(std::min(v, 1.0) * 255.0));
}

Image8 to_8bit(const LinearImage& img)
{
    Image8 out = Image8::zeros(img.width(), img.height());
    out.r = img.r.unaryExpr([](double v) { return quantize(v); });
    out.g = img.g.unaryExpr([](double v) { return quantize(v); });
    out.b = img.b.unaryExpr([](double v) { return quantize(v); });
    return out;
}

Image8 crop(const Image8& img, int x0, int width)
{
    if (x0 < 0 || width < 0 || x0 + width > img.width()) {
        throw ContractError("crop window outside image");
    }
    Image8 out;
    out.r = img.r.middleCols(x0, width);
    out.g = img.g.middleCols(x0, width);
    out.b = img.b.middleCols(x0, width);
    return out;
}

void write_png(const std::filesystem::path& path, const Image8& img)
{
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) {
        throw IoError("cannot open for writing: " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    std::vector<png_byte> row(static_cast<std::size_t>(img.width()) * 3);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing PNG: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const auto i = static_cast<std::size_t>(x) * 3;
            row[i] = img.r(y, x);
            row[i + 1] = img.g(y, x);
            row[i + 2] = img.b(y, x);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image8 read_png(const std::filesystem::path& path)
{
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) {
        throw IoError("cannot open for reading: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed");
    }
    Image8 img;
    std::vector<png_byte> row;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed reading PNG: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_bit_depth(png, info) < 8) png_set_packing(png);
    png_read_update_info(png, info);
    img = Image8::zeros(width, height);
    row.resize(png_get_rowbytes(png, info));
    for (int y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < width; ++x) {
            const auto i = static_cast<std::size_t>(x) * 3;
            img.r(y, x) = row[i];
            img.g(y, x) = row[i + 1];
            img.b(y, x) = row[i + 2];
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

std::uint64_t hash_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for hashing: " + path.string());
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

}  // namespace sfdi
