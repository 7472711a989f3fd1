#include "sfdi/groundtruth.hpp"

#include <cmath>
#include <string>

namespace sfdi {

std::uint8_t factor_to_pixel(double v)
{
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ContractError("ground-truth value outside [0,1]: " + std::to_string(v));
    }
    return static_cast<std::uint8_t>(std::round(v * 255.0));
}

MaterialId first_hit_material(const SceneTemplate& scene, const Ray& ray)
{
    constexpr int kMaxSurfaces = 16;
    Ray r = ray;
    for (int i = 0; i < kMaxSurfaces; ++i) {
        const auto hit = intersect(scene, r);
        if (!hit || hit->kind == SurfaceKind::backing) {
            return kBackground;
        }
        const MaterialId id = classify_point(scene, hit->point + 1e-6 * r.direction);
        if (id != kBackground) {
            return id;
        }
        r.origin = hit->point;
    }
    return kBackground;
}

Plane<int> material_mask(const SceneTemplate& scene)
{
    const Camera& cam = scene.camera;
    Plane<int> mask(cam.height, cam.width);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            mask(y, x) = first_hit_material(scene, cam.generate_ray(x + 0.5, y + 0.5));
        }
    }
    return mask;
}

Image8 render_ground_truth(const SceneTemplate& scene)
{
    scene.validate();
    const Plane<int> mask = material_mask(scene);
    Image8 img = Image8::zeros(scene.camera.width, scene.camera.height);
    for (Eigen::Index y = 0; y < mask.rows(); ++y) {
        for (Eigen::Index x = 0; x < mask.cols(); ++x) {
            const MaterialId id = mask(y, x);
            if (id == kBackground) {
                continue;
            }
            const Material& m = scene.material(id);
            img.r(y, x) = factor_to_pixel(m.gt_absorption);
            img.g(y, x) = factor_to_pixel(m.gt_scattering);
        }
    }
    return img;
}

}  // namespace sfdi
