#pragma once

#include "sfdi/common.hpp"
#include "sfdi/pattern.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sfdi {

/// Shader-mix weights. final_factor blends the absorbing component (0)
/// with the scattering component (1).
struct FactorTriple {
    double final_factor = 0.5;
    double absorption_factor = 1.0;
    double scattering_factor = 1.0;

    void validate() const;
};

struct Material {
    FactorTriple factors;
    // Authored ground-truth proxies: red = absorption, green = scattering.
    double gt_absorption = 0.5;
    double gt_scattering = 0.5;
    double hg_g = 0.0;
    double ior = 1.43;
    double subsurface_mfp = 0.5;  // mm
    double subsurface_albedo = 0.95;

    double extinction() const { return 1.0 / subsurface_mfp; }  // mm^-1
    void validate() const;
};

using MaterialId = int;
inline constexpr MaterialId kBackground = -1;

struct UniformRegion {
    MaterialId material = 0;
};

/// Two regions split by the cubic y = c0 + c1 x + c2 x^2 + c3 x^3.
struct BoundaryCurve {
    std::array<double, 4> coeffs{2.0, 0.3, 0.0, -4.0e-4};
    MaterialId below = 0;
    MaterialId above = 1;

    double y_at(double x) const
    {
        return coeffs[0] + x * (coeffs[1] + x * (coeffs[2] + x * coeffs[3]));
    }
};

/// Three regions split by two non-crossing jagged polylines y = lower(x) < upper(x).
/// Vertices are sorted by x and span the slab face.
struct RaggedPartition {
    std::vector<Vec2> lower;
    std::vector<Vec2> upper;
    std::array<MaterialId, 3> materials{0, 1, 2};

    static double polyline_y(const std::vector<Vec2>& line, double x);
};

using SlabPartition = std::variant<UniformRegion, BoundaryCurve, RaggedPartition>;

/// Axis-aligned box; the partition applies to the xy footprint through the full depth.
struct Slab {
    Vec3 lo{-25.0, -25.0, -10.0};
    Vec3 hi{25.0, 25.0, 0.0};
    SlabPartition partition = UniformRegion{};

    bool contains(const Vec3& p) const;
    MaterialId region_at(double x, double y) const;
};

/// Axis-aligned ellipsoid with semi-axes radii * scale.
struct Spheroid {
    Vec3 center = Vec3::Zero();
    Vec3 radii{1.0, 1.0, 1.0};
    Vec3 scale{1.0, 1.0, 1.0};
    MaterialId material = 0;

    Vec3 semi_axes() const { return radii.cwiseProduct(scale); }
    bool contains(const Vec3& p) const;
};

/// Tube around the z axis spanning z in [-length, 0]; radius is the outer radius.
struct HollowCylinder {
    double radius = 15.0;
    double length = 100.0;
    double wall_thickness = 3.0;
    MaterialId material = 0;

    double inner_radius() const { return radius - wall_thickness; }
    bool contains(const Vec3& p) const;
};

/// Lambertian plane z = height facing +z. Not a material region: ground-truth renders
/// treat it as background.
struct DiffuseBacking {
    double height = -10.5;
    double reflectance = 0.5;
};

using GeometryPrimitive = std::variant<Slab, Spheroid, HollowCylinder>;

/// Orthonormal right/up/forward frame.
struct Frame {
    Vec3 right = Vec3::UnitX();
    Vec3 up = Vec3::UnitY();
    Vec3 forward = -Vec3::UnitZ();

    static Frame look_along(const Vec3& forward, const Vec3& up_hint);
    bool orthonormal(double tol = 1e-9) const;
};

struct Camera {
    Vec3 position{0.0, 0.0, 100.0};
    Frame frame;
    double fov_deg = 60.0;  // horizontal
    int width = 256;
    int height = 256;
    double exposure = 1.0;  // linear pixel value per unit radiance

    /// Ray through image-plane coordinates (px, py) in pixels, origin top-left.
    Ray generate_ray(double px, double py) const;
    void validate() const;
};

struct Orthographic {
    double half_width = 30.0;   // mm
    double half_height = 30.0;  // mm
};

struct Perspective {
    double throw_deg = 100.0;         // full angle
    double reference_distance = 10.0; // mm; pattern frequency is defined on this plane
};

using ProjectionModel = std::variant<Orthographic, Perspective>;

struct Projector {
    Vec3 position{0.0, 0.0, 150.0};
    Frame frame;
    double power = 3.5;  // W
    SinusoidalPattern pattern;
    ProjectionModel model = Orthographic{};

    void validate() const;
};

enum class TemplateName { rectangular, rectangular_curved, rectangular_ragged, rectangular_tumour, cylinder_tumour };

std::string to_string(TemplateName name);
TemplateName template_from_string(const std::string& name);

/// Dotted parameter paths such as "material[0].factors.final_factor" mapped to values.
using ParameterSet = std::map<std::string, double>;

struct SceneTemplate {
    TemplateName name = TemplateName::rectangular;
    std::vector<Material> materials;
    std::optional<Slab> slab;
    std::optional<HollowCylinder> cylinder;
    std::vector<Spheroid> spheroids;
    std::optional<DiffuseBacking> backing;
    Camera camera;
    Projector projector;

    const Material& material(MaterialId id) const { return materials.at(static_cast<std::size_t>(id)); }
    std::vector<GeometryPrimitive> primitives() const;

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

/// Template-level knobs consumed by build_template before path overrides apply.
inline constexpr const char* kSpheroidCountKey = "spheroid_count";
inline constexpr const char* kRaggedSeedKey = "ragged_seed";

SceneTemplate build_template(TemplateName name, const ParameterSet& overrides = {});
SceneTemplate build_template(const std::string& name, const ParameterSet& overrides = {});

/// Throws ConfigError listing the path if it does not resolve in this scene.
void set_parameter(SceneTemplate& scene, const std::string& path, double value);
double get_parameter(const SceneTemplate& scene, const std::string& path);

/// Material occupying p. Spheroids take precedence over the slab and the tube wall.
MaterialId classify_point(const SceneTemplate& scene, const Vec3& p);

enum class SurfaceKind { material, backing };

struct SurfaceHit {
    double t = kInfinity;
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();  // unit, orientation unspecified
    SurfaceKind kind = SurfaceKind::material;
};

/// Nearest surface crossing with t in (tmin, tmax).
std::optional<SurfaceHit> intersect(const SceneTemplate& scene, const Ray& ray, double tmin = 1e-7,
                                    double tmax = kInfinity, bool include_backing = true);

/// Distance along the ray until it leaves the union of material regions. p must be inside.
double distance_to_exit(const SceneTemplate& scene, const Ray& ray);

}  // namespace sfdi
