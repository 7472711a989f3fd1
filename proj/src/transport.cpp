#include "sfdi/transport.hpp"

#include "sfdi/illumination.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>
#include <vector>

namespace sfdi {

namespace {

constexpr double kNudge = 1e-6;  // mm, used to classify either side of a surface

/// Survival test; returns false when the path is terminated.
bool roulette(Rgb& throughput, const RenderSettings& settings, CounterRng& rng)
{
    const double m = throughput.maxCoeff();
    if (m >= settings.roulette_survival) {
        return true;
    }
    if (m <= 0.0 || rng.uniform() * settings.roulette_survival >= m) {
        return false;
    }
    throughput *= settings.roulette_survival / m;
    return true;
}

Vec3 reflect(const Vec3& d, const Vec3& n) { return d - 2.0 * d.dot(n) * n; }

/// Snell refraction of d through a surface with normal n facing against d.
/// Returns false on total internal reflection.
bool refract(const Vec3& d, const Vec3& n, double eta, Vec3& out)
{
    const double cos_i = -d.dot(n);
    const double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
    if (sin2_t >= 1.0) {
        return false;
    }
    const double cos_t = std::sqrt(1.0 - sin2_t);
    out = (eta * d + (eta * cos_i - cos_t) * n).normalized();
    return true;
}

/// Fresnel-weighted choice at an interface; updates the direction in place.
/// Returns true when the ray was transmitted.
bool dielectric_boundary(Vec3& d, Vec3 n, double n1, double n2, double xi)
{
    if (n.dot(d) > 0.0) {
        n = -n;
    }
    const double cos_i = std::clamp(-d.dot(n), 0.0, 1.0);
    const double reflectance = fresnel_dielectric(cos_i, n1, n2);
    Vec3 t;
    if (xi < reflectance || !refract(d, n, n1 / n2, t)) {
        d = reflect(d, n);
        return false;
    }
    d = t;
    return true;
}

double straight_transmittance(const Material& m, double cos_i, double n1)
{
    const FactorTriple& f = m.factors;
    const double refract_part = f.absorption_factor * (1.0 - fresnel_dielectric(cos_i, n1, m.ior));
    return (1.0 - f.final_factor) * (0.5 + 0.5 * refract_part) + f.final_factor * (1.0 - f.scattering_factor);
}

double material_ior(const SceneTemplate& scene, MaterialId id)
{
    return id == kBackground ? 1.0 : scene.material(id).ior;
}

Vec3 cosine_hemisphere(const Vec3& n, double xi1, double xi2)
{
    const double r = std::sqrt(xi1);
    const double phi = 2.0 * kPi * xi2;
    const Vec3 a = std::abs(n.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
    const Vec3 t = n.cross(a).normalized();
    const Vec3 b = n.cross(t);
    return (r * std::cos(phi) * t + r * std::sin(phi) * b + std::sqrt(std::max(0.0, 1.0 - xi1)) * n).normalized();
}

/// Projector light reaching scattering position x inside material m, scattered toward -incoming.
double gather_projector(const SceneTemplate& scene, const Material& m, const Vec3& x, const Vec3& incoming)
{
    const LightSample toward = sample_projector(scene.projector, x);
    const double to_boundary = distance_to_exit(scene, Ray{x, toward.direction});
    if (!std::isfinite(to_boundary)) {
        return 0.0;
    }
    const Vec3 y = x + to_boundary * toward.direction;
    const LightSample at_exit = sample_projector(scene.projector, y);
    if (at_exit.irradiance <= 0.0) {
        return 0.0;
    }
    const double inside = std::exp(-m.extinction() * to_boundary);
    const double outside = shadow_transmittance(scene, y, at_exit.direction, at_exit.distance);
    return hg_density(m.hg_g, incoming.dot(toward.direction)) * inside * outside * at_exit.irradiance;
}

}  // namespace

void RenderSettings::validate() const
{
    if (samples_per_pixel < 1) throw ConfigError("samples_per_pixel must be >= 1");
    if (max_bounces < 1) throw ConfigError("max_bounces must be >= 1");
    if (roulette_start < 0) throw ConfigError("roulette_start must be >= 0");
    if (!(roulette_survival > 0.0 && roulette_survival <= 1.0)) {
        throw ConfigError("roulette_survival must lie in (0,1]");
    }
    if (tile_size < 1) throw ConfigError("tile_size must be >= 1");
    if (walk_step_cap < 1) throw ConfigError("walk_step_cap must be >= 1");
}

InteractionEvent sample_interaction(const Material& material, double xi1, double xi2)
{
    const FactorTriple& f = material.factors;
    if (xi1 < f.final_factor) {
        if (xi2 < f.scattering_factor) {
            return {InteractionKind::subsurface_scatter, 1.0};
        }
        return {InteractionKind::transparent_pass, 1.0};
    }
    if (xi2 < 0.5) {
        return {InteractionKind::transparent_pass, 1.0};
    }
    return {InteractionKind::refract, f.absorption_factor};
}

HgSample sample_hg(double g, double xi1, double xi2)
{
    double cos_theta;
    if (std::abs(g) < 1e-3) {
        cos_theta = 2.0 * xi1 - 1.0;
    } else {
        const double s = (1.0 - g * g) / (1.0 - g + 2.0 * g * xi1);
        cos_theta = (1.0 + g * g - s * s) / (2.0 * g);
    }
    return {std::clamp(cos_theta, -1.0, 1.0), 2.0 * kPi * xi2};
}

double hg_density(double g, double cos_theta)
{
    const double denom = 1.0 + g * g - 2.0 * g * cos_theta;
    return (1.0 - g * g) / (4.0 * kPi * denom * std::sqrt(denom));
}

Vec3 scatter_direction(const Vec3& incoming, const HgSample& s)
{
    const Vec3 a = std::abs(incoming.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
    const Vec3 t = incoming.cross(a).normalized();
    const Vec3 b = incoming.cross(t);
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - s.cos_theta * s.cos_theta));
    return (sin_theta * std::cos(s.azimuth) * t + sin_theta * std::sin(s.azimuth) * b + s.cos_theta * incoming)
        .normalized();
}

double sample_free_path(double mu_t, double xi)
{
    if (mu_t <= 0.0) {
        return kInfinity;
    }
    return -std::log(xi) / mu_t;
}

double fresnel_dielectric(double cos_i, double n1, double n2)
{
    cos_i = std::clamp(cos_i, 0.0, 1.0);
    const double eta = n1 / n2;
    const double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
    if (sin2_t >= 1.0) {
        return 1.0;
    }
    const double cos_t = std::sqrt(1.0 - sin2_t);
    const double rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
    const double rp = (n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t);
    return 0.5 * (rs * rs + rp * rp);
}

WalkResult trace_subsurface(const SceneTemplate& scene, const Ray& entry, CounterRng& rng,
                            const RenderSettings& settings, bool gather_light)
{
    WalkResult w;
    Vec3 x = entry.origin;
    Vec3 d = entry.direction.normalized();
    MaterialId id = classify_point(scene, x + kNudge * d);
    if (id == kBackground) {
        w.status = WalkStatus::escaped;
        w.exit = Ray{x, d};
        return w;
    }
    for (int step = 0; step < settings.walk_step_cap; ++step) {
        const Material* m = &scene.material(id);
        const double s = sample_free_path(m->extinction(), 1.0 - rng.uniform());
        const double boundary = distance_to_exit(scene, Ray{x, d});
        if (s >= boundary) {
            w.status = WalkStatus::escaped;
            w.exit = Ray{x + boundary * d, d};
            return w;
        }
        x += s * d;
        const MaterialId here = classify_point(scene, x);
        if (here != kBackground) {
            id = here;
            m = &scene.material(id);
        }
        w.throughput *= m->subsurface_albedo;
        ++w.events;
        if (w.throughput.maxCoeff() <= 0.0) {
            w.status = WalkStatus::absorbed;
            return w;
        }
        if (gather_light) {
            w.radiance += w.throughput * gather_projector(scene, *m, x, d);
        }
        if (w.events >= settings.roulette_start && !roulette(w.throughput, settings, rng)) {
            w.status = WalkStatus::absorbed;
            return w;
        }
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        d = scatter_direction(d, sample_hg(m->hg_g, u1, u2));
    }
    w.status = WalkStatus::capped;
    return w;
}

double shadow_transmittance(const SceneTemplate& scene, const Vec3& p, const Vec3& dir, double max_distance)
{
    constexpr int kMaxCrossings = 64;
    double transmittance = 1.0;
    Ray r{p, dir};
    double remaining = max_distance;
    for (int i = 0; i < kMaxCrossings && transmittance > 0.0; ++i) {
        const auto hit = intersect(scene, r, 1e-7, remaining, true);
        if (!hit) {
            return transmittance;
        }
        if (hit->kind == SurfaceKind::backing) {
            return 0.0;
        }
        const MaterialId behind = classify_point(scene, hit->point - kNudge * dir);
        const MaterialId ahead = classify_point(scene, hit->point + kNudge * dir);
        if (ahead != kBackground && ahead != behind) {
            const double cos_i = std::abs(dir.dot(hit->normal));
            transmittance *= straight_transmittance(scene.material(ahead), cos_i, material_ior(scene, behind));
        }
        r.origin = hit->point;
        remaining -= hit->t;
    }
    return transmittance;
}

void RenderStats::merge(const RenderStats& o)
{
    paths += o.paths;
    walks += o.walks;
    walks_escaped += o.walks_escaped;
    walks_absorbed += o.walks_absorbed;
    walks_capped += o.walks_capped;
    roulette_kills += o.roulette_kills;
    bounce_limit += o.bounce_limit;
    max_throughput = std::max(max_throughput, o.max_throughput);
}

Rgb trace_camera_path(const SceneTemplate& scene, const RenderSettings& settings, double px, double py,
                      CounterRng& rng, RenderStats& stats)
{
    ++stats.paths;
    Rgb radiance = Rgb::Zero();
    Rgb throughput = Rgb::Ones();
    Ray ray = scene.camera.generate_ray(px, py);
    bool refracting = false;
    int bounce = 0;
    for (; bounce < settings.max_bounces; ++bounce) {
        const auto hit = intersect(scene, ray);
        if (!hit) {
            return radiance;
        }
        const Vec3 x = hit->point;
        Vec3 d = ray.direction;

        if (hit->kind == SurfaceKind::backing) {
            const Vec3 n = d.z() > 0.0 ? Vec3(-Vec3::UnitZ()) : Vec3(Vec3::UnitZ());
            const double rho = scene.backing->reflectance;
            const LightSample ls = sample_projector(scene.projector, x);
            const double cos_l = n.dot(ls.direction);
            if (cos_l > 0.0 && ls.irradiance > 0.0) {
                radiance += throughput * (rho / kPi * ls.irradiance * cos_l *
                                          shadow_transmittance(scene, x, ls.direction, ls.distance));
            }
            throughput *= rho;
            const double u1 = rng.uniform();
            const double u2 = rng.uniform();
            ray = Ray{x, cosine_hemisphere(n, u1, u2)};
            refracting = false;
        } else {
            const MaterialId behind = classify_point(scene, x - kNudge * d);
            const MaterialId ahead = classify_point(scene, x + kNudge * d);
            if (ahead == behind) {
                ray.origin = x;
                continue;
            }
            const double n1 = material_ior(scene, behind);
            if (ahead == kBackground) {
                if (refracting && dielectric_boundary(d, hit->normal, n1, 1.0, rng.uniform())) {
                    refracting = false;
                }
                ray = Ray{x, d};
            } else {
                const Material& m = scene.material(ahead);
                const double u1 = rng.uniform();
                const double u2 = rng.uniform();
                const InteractionEvent ev = sample_interaction(m, u1, u2);
                switch (ev.kind) {
                case InteractionKind::transparent_pass:
                case InteractionKind::absorbed:
                    refracting = false;
                    ray.origin = x;
                    break;
                case InteractionKind::refract:
                    throughput *= ev.throughput_multiplier;
                    if (throughput.maxCoeff() <= 0.0) {
                        return radiance;
                    }
                    if (dielectric_boundary(d, hit->normal, n1, m.ior, rng.uniform())) {
                        refracting = true;
                    }
                    ray = Ray{x, d};
                    break;
                case InteractionKind::subsurface_scatter: {
                    ++stats.walks;
                    const WalkResult walk = trace_subsurface(scene, Ray{x, d}, rng, settings);
                    radiance += throughput * walk.radiance;
                    if (walk.status != WalkStatus::escaped) {
                        ++(walk.status == WalkStatus::capped ? stats.walks_capped : stats.walks_absorbed);
                        stats.max_throughput = std::max(stats.max_throughput, walk.throughput.maxCoeff());
                        return radiance;
                    }
                    ++stats.walks_escaped;
                    throughput *= walk.throughput;
                    ray = walk.exit;
                    refracting = false;
                    break;
                }
                }
            }
        }
        stats.max_throughput = std::max(stats.max_throughput, throughput.maxCoeff());
        if (bounce >= settings.roulette_start && !roulette(throughput, settings, rng)) {
            ++stats.roulette_kills;
            return radiance;
        }
    }
    ++stats.bounce_limit;
    return radiance;
}

RenderResult render(const SceneTemplate& scene, const RenderSettings& settings, int workers)
{
    scene.validate();
    settings.validate();
    const auto start = std::chrono::steady_clock::now();

    const int width = scene.camera.width;
    const int height = scene.camera.height;
    const int tile = settings.tile_size;
    const int tiles_x = (width + tile - 1) / tile;
    const int tiles_y = (height + tile - 1) / tile;
    const int tile_count = tiles_x * tiles_y;
    if (workers <= 0) {
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    workers = std::clamp(workers, 1, std::max(1, tile_count));

    RenderResult result;
    result.linear = LinearImage::zeros(width, height);
    std::vector<RenderStats> worker_stats(static_cast<std::size_t>(workers));
    std::atomic<int> next_tile{0};
    const double spp = settings.samples_per_pixel;
    const double exposure = scene.camera.exposure;

    auto work = [&](int worker) {
        RenderStats& stats = worker_stats[static_cast<std::size_t>(worker)];
        for (int t = next_tile.fetch_add(1); t < tile_count; t = next_tile.fetch_add(1)) {
            const int x0 = (t % tiles_x) * tile;
            const int y0 = (t / tiles_x) * tile;
            for (int y = y0; y < std::min(y0 + tile, height); ++y) {
                for (int x = x0; x < std::min(x0 + tile, width); ++x) {
                    const auto pixel = static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(width) +
                                       static_cast<std::uint64_t>(x);
                    Rgb sum = Rgb::Zero();
                    for (int k = 0; k < settings.samples_per_pixel; ++k) {
                        CounterRng rng(settings.rng_seed, pixel, static_cast<std::uint64_t>(k));
                        const double jx = rng.uniform();
                        const double jy = rng.uniform();
                        sum += trace_camera_path(scene, settings, x + jx, y + jy, rng, stats);
                    }
                    const Rgb value = sum / spp * exposure;
                    result.linear.r(y, x) = value[0];
                    result.linear.g(y, x) = value[1];
                    result.linear.b(y, x) = value[2];
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) {
        pool.emplace_back(work, w);
    }
    work(0);
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& s : worker_stats) {
        result.stats.merge(s);
    }
    result.stats.workers = workers;
    result.image = to_8bit(result.linear);
    result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace sfdi
