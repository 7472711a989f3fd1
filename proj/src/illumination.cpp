#include "sfdi/illumination.hpp"

#include <cmath>

namespace sfdi {

namespace {

double reference_half_extent(const Perspective& p)
{
    return p.reference_distance * std::tan(0.5 * p.throw_deg * kPi / 180.0);
}

}  // namespace

EmittedRay emit_ray(const Projector& projector, const SinusoidalPattern& pattern, const Vec2& u)
{
    const Frame& f = projector.frame;
    if (const auto* ortho = std::get_if<Orthographic>(&projector.model)) {
        const double pu = (2.0 * u.x() - 1.0) * ortho->half_width;
        const double pv = (2.0 * u.y() - 1.0) * ortho->half_height;
        const Ray ray{projector.position + pu * f.right + pv * f.up, f.forward};
        return {ray, projector.power * pattern_intensity(pattern, pu, pv)};
    }
    const auto& persp = std::get<Perspective>(projector.model);
    const double half = reference_half_extent(persp);
    const double pu = (2.0 * u.x() - 1.0) * half;
    const double pv = (2.0 * u.y() - 1.0) * half;
    const Vec3 dir = (persp.reference_distance * f.forward + pu * f.right + pv * f.up).normalized();
    return {Ray{projector.position, dir}, projector.power * pattern_intensity(pattern, pu, pv)};
}

std::optional<Vec2> pattern_coordinates(const Projector& projector, const Vec3& p)
{
    const Frame& f = projector.frame;
    const Vec3 w = p - projector.position;
    const double depth = w.dot(f.forward);
    if (depth <= 0.0) {
        return std::nullopt;
    }
    if (const auto* ortho = std::get_if<Orthographic>(&projector.model)) {
        const Vec2 uv(w.dot(f.right), w.dot(f.up));
        if (std::abs(uv.x()) > ortho->half_width || std::abs(uv.y()) > ortho->half_height) {
            return std::nullopt;
        }
        return uv;
    }
    const auto& persp = std::get<Perspective>(projector.model);
    const Vec2 uv = persp.reference_distance / depth * Vec2(w.dot(f.right), w.dot(f.up));
    const double half = reference_half_extent(persp);
    if (std::abs(uv.x()) > half || std::abs(uv.y()) > half) {
        return std::nullopt;
    }
    return uv;
}

LightSample sample_projector(const Projector& projector, const Vec3& p)
{
    LightSample ls;
    const auto uv = pattern_coordinates(projector, p);
    if (const auto* ortho = std::get_if<Orthographic>(&projector.model)) {
        ls.direction = -projector.frame.forward;
        ls.distance = kInfinity;
        if (uv) {
            const double area = 4.0 * ortho->half_width * ortho->half_height;
            ls.irradiance = projector.power / area * pattern_intensity(projector.pattern, uv->x(), uv->y());
        }
        return ls;
    }
    const auto& persp = std::get<Perspective>(projector.model);
    const Vec3 w = p - projector.position;
    const double r = w.norm();
    ls.direction = -w / r;
    ls.distance = r;
    if (uv) {
        const double half = reference_half_extent(persp);
        const double area = 4.0 * half * half;
        const double cos_theta = w.dot(projector.frame.forward) / r;
        // Radiant intensity of a uniform emitter on the reference plane, then inverse square.
        const double intensity = projector.power * pattern_intensity(projector.pattern, uv->x(), uv->y()) / area *
                                 persp.reference_distance * persp.reference_distance /
                                 (cos_theta * cos_theta * cos_theta);
        ls.irradiance = intensity / (r * r);
    }
    return ls;
}

}  // namespace sfdi
