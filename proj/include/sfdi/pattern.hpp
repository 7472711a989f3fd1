#pragma once

#include "sfdi/common.hpp"

#include <Eigen/Core>

#include <cmath>
#include <concepts>

namespace sfdi {

/// Sinusoidal fringe: I(u,v) = dc + depth * cos(2*pi*f*(u*o_u + v*o_v) + phase).
/// (u, v) are millimetres on the projector's reference plane.
struct SinusoidalPattern {
    double spatial_frequency = 0.2;  // mm^-1
    double phase = 0.0;              // rad
    Vec2 orientation = Vec2::UnitX();
    double dc_level = 0.5;
    double modulation_depth = 0.5;

    double period() const { return 1.0 / spatial_frequency; }
    double mean_intensity() const { return dc_level; }

    void validate() const;
};

template <std::floating_point Scalar>
Scalar pattern_intensity(const SinusoidalPattern& p, Scalar u, Scalar v)
{
    using std::cos;
    const Scalar s = u * Scalar(p.orientation.x()) + v * Scalar(p.orientation.y());
    return Scalar(p.dc_level) +
           Scalar(p.modulation_depth) *
               cos(Scalar(2.0 * kPi * p.spatial_frequency) * s + Scalar(p.phase));
}

/// Coefficient-wise form over coordinate arrays.
template <typename DerivedU, typename DerivedV>
auto pattern_intensity(const SinusoidalPattern& p, const Eigen::ArrayBase<DerivedU>& u,
                       const Eigen::ArrayBase<DerivedV>& v)
{
    using Scalar = typename DerivedU::Scalar;
    return (((u * Scalar(p.orientation.x()) + v * Scalar(p.orientation.y())) *
                 Scalar(2.0 * kPi * p.spatial_frequency) +
             Scalar(p.phase))
                .cos() *
            Scalar(p.modulation_depth) +
            Scalar(p.dc_level));
}

}  // namespace sfdi
