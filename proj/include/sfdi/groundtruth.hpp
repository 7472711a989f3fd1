#pragma once

#include "sfdi/image.hpp"
#include "sfdi/scene.hpp"

#include <cstdint>

namespace sfdi {

/// Proxy values in [0.05, 0.95] map to 8-bit 13..242; blue is always 0.
struct GtEncoding {
    static constexpr double channel_min = 0.05;
    static constexpr double channel_max = 0.95;
    static constexpr std::uint8_t pixel_min = 13;
    static constexpr std::uint8_t pixel_max = 242;
    static constexpr std::uint8_t blue = 0;
};

/// round(v * 255), half away from zero. Throws ContractError outside [0,1].
std::uint8_t factor_to_pixel(double v);

/// Material seen by a primary ray, or kBackground.
MaterialId first_hit_material(const SceneTemplate& scene, const Ray& ray);

/// Per-pixel first-hit material through pixel centres.
Plane<int> material_mask(const SceneTemplate& scene);

/// Flat, shading-free property map: (gt_absorption, gt_scattering, 0) per first-hit
/// material, (0,0,0) where the primary ray misses. Uses no random numbers.
Image8 render_ground_truth(const SceneTemplate& scene);

}  // namespace sfdi
