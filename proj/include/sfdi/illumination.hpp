#pragma once

#include "sfdi/common.hpp"
#include "sfdi/scene.hpp"

#include <optional>

namespace sfdi {

struct EmittedRay {
    Ray ray;
    double weight = 0.0;  // W; the mean over launches is power * mean pattern intensity
};

/// Launch one projector ray from two uniform draws. Orthographic projectors emit
/// parallel rays from the aperture; perspective projectors emit from the apex through
/// the reference plane.
EmittedRay emit_ray(const Projector& projector, const SinusoidalPattern& pattern, const Vec2& u);
inline EmittedRay emit_ray(const Projector& projector, const Vec2& u)
{
    return emit_ray(projector, projector.pattern, u);
}

/// Pattern-plane coordinates (mm) of the projector ray through p, or nullopt when p is
/// outside the projected footprint.
std::optional<Vec2> pattern_coordinates(const Projector& projector, const Vec3& p);

struct LightSample {
    Vec3 direction = Vec3::UnitZ();  // from the shaded point toward the projector
    double distance = kInfinity;     // to the apex; infinite for orthographic
    double irradiance = 0.0;         // W/mm^2 on a plane facing the projector
};

LightSample sample_projector(const Projector& projector, const Vec3& p);

}  // namespace sfdi
