#pragma once

#include "sfdi/common.hpp"
#include "sfdi/image.hpp"
#include "sfdi/rng.hpp"
#include "sfdi/scene.hpp"

#include <climits>
#include <cstdint>

namespace sfdi {

struct RenderSettings {
    static constexpr int kNoRoulette = INT_MAX;

    int samples_per_pixel = 512;
    int max_bounces = 32;
    int roulette_start = 8;
    // Paths whose largest throughput channel falls below this value survive with
    // probability max/roulette_survival and are rescaled to roulette_survival.
    double roulette_survival = 0.25;
    std::uint64_t rng_seed = 0;
    int tile_size = 16;
    int walk_step_cap = 10000;

    void validate() const;
};

enum class InteractionKind { transparent_pass, refract, absorbed, subsurface_scatter };

struct InteractionEvent {
    InteractionKind kind = InteractionKind::transparent_pass;
    double throughput_multiplier = 1.0;
};

/// Stochastic evaluation of the shader mix at a surface crossing.
InteractionEvent sample_interaction(const Material& material, double xi1, double xi2);

struct HgSample {
    double cos_theta = 1.0;
    double azimuth = 0.0;
};

/// Henyey-Greenstein inversion; cos_theta is measured from the incoming direction.
HgSample sample_hg(double g, double xi1, double xi2);
double hg_density(double g, double cos_theta);  // per steradian
Vec3 scatter_direction(const Vec3& incoming, const HgSample& s);

/// -ln(xi)/mu_t; infinite when mu_t == 0. xi in (0,1].
double sample_free_path(double mu_t, double xi);

/// Unpolarised dielectric reflectance for cos_i >= 0 from index n1 into n2.
double fresnel_dielectric(double cos_i, double n1, double n2);

enum class WalkStatus { escaped, absorbed, capped };

struct WalkResult {
    WalkStatus status = WalkStatus::absorbed;
    Ray exit;                         // valid when escaped
    Rgb throughput = Rgb::Ones();     // relative to entry
    Rgb radiance = Rgb::Zero();       // projector light gathered at scattering events
    int events = 0;
};

/**
 * Random walk inside the material union, starting at a surface point and heading
 * inward. Step lengths use the local material's mean free path, directions its HG
 * anisotropy, and each event multiplies throughput by the local albedo. With
 * gather_light set, every event connects to the projector through the boundary.
 */
WalkResult trace_subsurface(const SceneTemplate& scene, const Ray& entry, CounterRng& rng,
                            const RenderSettings& settings, bool gather_light = true);

/// Expected straight-line transmittance of the projector shadow ray from p toward the light.
double shadow_transmittance(const SceneTemplate& scene, const Vec3& p, const Vec3& dir, double max_distance);

struct RenderStats {
    std::uint64_t paths = 0;
    std::uint64_t walks = 0;
    std::uint64_t walks_escaped = 0;
    std::uint64_t walks_absorbed = 0;
    std::uint64_t walks_capped = 0;
    std::uint64_t roulette_kills = 0;
    std::uint64_t bounce_limit = 0;
    double max_throughput = 0.0;  // largest path throughput observed; never exceeds 1
    double seconds = 0.0;
    int workers = 1;

    void merge(const RenderStats& o);
};

struct RenderResult {
    LinearImage linear;
    Image8 image;
    RenderStats stats;
};

/// Radiance estimate for one camera sample through pixel coordinates (px, py).
Rgb trace_camera_path(const SceneTemplate& scene, const RenderSettings& settings, double px, double py,
                      CounterRng& rng, RenderStats& stats);

/// Tile-parallel render. Each sample's random stream is keyed by (seed, pixel, sample),
/// so the result is bit-identical for any worker count. workers <= 0 uses the hardware count.
RenderResult render(const SceneTemplate& scene, const RenderSettings& settings, int workers = 0);

}  // namespace sfdi
