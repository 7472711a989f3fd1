#pragma once

#include "sfdi/common.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>

namespace sfdi {

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Map2d = Plane<double>;

/// 8-bit RGB image stored as three row-major planes (rows = height).
struct Image8 {
    Plane<std::uint8_t> r, g, b;

    static Image8 zeros(int width, int height);

    int width() const { return static_cast<int>(r.cols()); }
    int height() const { return static_cast<int>(r.rows()); }

    bool operator==(const Image8& o) const;
};

/// Linear-light RGB accumulation buffer.
struct LinearImage {
    Map2d r, g, b;

    static LinearImage zeros(int width, int height);

    int width() const { return static_cast<int>(r.cols()); }
    int height() const { return static_cast<int>(r.rows()); }

    Map2d luminance() const { return (r + g + b) / 3.0; }
};

/// Clamp to [0,1], scale by 255 and round half away from zero.
std::uint8_t quantize(double v);

/// Linear mapping, no tone curve.
Image8 to_8bit(const LinearImage& img);

Image8 crop(const Image8& img, int x0, int width);

void write_png(const std::filesystem::path& path, const Image8& img);
Image8 read_png(const std::filesystem::path& path);

std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace sfdi
