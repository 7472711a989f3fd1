#include "sfdi/scene.hpp"

#include "sfdi/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace sfdi {

namespace {

constexpr double kDegToRad = kPi / 180.0;

[[noreturn]] void config_error(const std::string& what) { throw ConfigError(what); }

void require(bool ok, const std::string& what)
{
    if (!ok) {
        config_error(what);
    }
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

double solve_enter(double a, double b, double c, double tmin, double tmax)
{
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        return kInfinity;
    }
    const double sq = std::sqrt(disc);
    // Numerically stable pair.
    const double q = -0.5 * (b + std::copysign(sq, b));
    double t0 = q / a;
    double t1 = q != 0.0 ? c / q : t0;
    if (t0 > t1) {
        std::swap(t0, t1);
    }
    if (t0 > tmin && t0 < tmax) {
        return t0;
    }
    if (t1 > tmin && t1 < tmax) {
        return t1;
    }
    return kInfinity;
}

struct Candidate {
    double t = kInfinity;
    Vec3 normal = Vec3::UnitZ();
    SurfaceKind kind = SurfaceKind::material;

    void offer(double tt, const Vec3& n, SurfaceKind k = SurfaceKind::material)
    {
        if (tt < t) {
            t = tt;
            normal = n;
            kind = k;
        }
    }
};

void hit_box(const Slab& s, const Ray& ray, double tmin, Candidate& best)
{
    double tnear = -kInfinity;
    double tfar = kInfinity;
    int near_axis = -1;
    int far_axis = -1;
    for (int i = 0; i < 3; ++i) {
        const double o = ray.origin[i];
        const double d = ray.direction[i];
        if (std::abs(d) < 1e-300) {
            if (o < s.lo[i] || o > s.hi[i]) {
                return;
            }
            continue;
        }
        double t1 = (s.lo[i] - o) / d;
        double t2 = (s.hi[i] - o) / d;
        if (t1 > t2) {
            std::swap(t1, t2);
        }
        if (t1 > tnear) {
            tnear = t1;
            near_axis = i;
        }
        if (t2 < tfar) {
            tfar = t2;
            far_axis = i;
        }
    }
    if (tnear > tfar) {
        return;
    }
    if (tnear > tmin && near_axis >= 0) {
        best.offer(tnear, Vec3::Unit(near_axis));
    } else if (tfar > tmin && far_axis >= 0) {
        best.offer(tfar, Vec3::Unit(far_axis));
    }
}

void hit_spheroid(const Spheroid& s, const Ray& ray, double tmin, Candidate& best)
{
    const Vec3 axes = s.semi_axes();
    const Vec3 o = (ray.origin - s.center).cwiseQuotient(axes);
    const Vec3 d = ray.direction.cwiseQuotient(axes);
    const double t = solve_enter(d.squaredNorm(), 2.0 * o.dot(d), o.squaredNorm() - 1.0, tmin, best.t);
    if (t < best.t) {
        const Vec3 p = ray.at(t) - s.center;
        best.offer(t, p.cwiseQuotient(axes.cwiseProduct(axes)).normalized());
    }
}

void hit_cylinder(const HollowCylinder& c, const Ray& ray, double tmin, Candidate& best)
{
    const Vec3& o = ray.origin;
    const Vec3& d = ray.direction;
    const double a = d.x() * d.x() + d.y() * d.y();
    if (a > 1e-18) {
        const double b = 2.0 * (o.x() * d.x() + o.y() * d.y());
        const double r0 = o.x() * o.x() + o.y() * o.y();
        for (double radius : {c.inner_radius(), c.radius}) {
            const double disc = b * b - 4.0 * a * (r0 - radius * radius);
            if (disc < 0.0) {
                continue;
            }
            const double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
                if (t <= tmin || t >= best.t) {
                    continue;
                }
                const double z = o.z() + t * d.z();
                if (z < -c.length || z > 0.0) {
                    continue;
                }
                const Vec3 p = ray.at(t);
                best.offer(t, Vec3(p.x(), p.y(), 0.0) / radius);
            }
        }
    }
    if (std::abs(d.z()) > 1e-300) {
        const double rin2 = c.inner_radius() * c.inner_radius();
        const double rout2 = c.radius * c.radius;
        for (double zc : {0.0, -c.length}) {
            const double t = (zc - o.z()) / d.z();
            if (t <= tmin || t >= best.t) {
                continue;
            }
            const Vec3 p = ray.at(t);
            const double r2 = p.x() * p.x() + p.y() * p.y();
            if (r2 >= rin2 && r2 <= rout2) {
                best.offer(t, Vec3::UnitZ());
            }
        }
    }
}

/// Splits "material[3]" into ("material", 3); index -1 if absent.
std::pair<std::string, int> split_index(const std::string& token, const std::string& path)
{
    const auto open = token.find('[');
    if (open == std::string::npos) {
        return {token, -1};
    }
    const auto close = token.find(']', open);
    if (close == std::string::npos || close != token.size() - 1) {
        config_error("malformed parameter path: " + path);
    }
    int idx = -1;
    const char* first = token.data() + open + 1;
    const char* last = token.data() + close;
    auto [ptr, ec] = std::from_chars(first, last, idx);
    if (ec != std::errc() || ptr != last || idx < 0) {
        config_error("malformed index in parameter path: " + path);
    }
    return {token.substr(0, open), idx};
}

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        parts.push_back(part);
    }
    return parts;
}

double* axis_field(Vec3& v, const std::string& axis)
{
    if (axis == "x") return &v.x();
    if (axis == "y") return &v.y();
    if (axis == "z") return &v.z();
    return nullptr;
}

double* material_field(Material& m, const std::vector<std::string>& rest)
{
    if (rest.size() == 2 && rest[0] == "factors") {
        if (rest[1] == "final_factor") return &m.factors.final_factor;
        if (rest[1] == "absorption_factor") return &m.factors.absorption_factor;
        if (rest[1] == "scattering_factor") return &m.factors.scattering_factor;
        return nullptr;
    }
    if (rest.size() != 1) {
        return nullptr;
    }
    const std::string& f = rest[0];
    if (f == "gt_absorption") return &m.gt_absorption;
    if (f == "gt_scattering") return &m.gt_scattering;
    if (f == "hg_g") return &m.hg_g;
    if (f == "ior") return &m.ior;
    if (f == "subsurface_mfp") return &m.subsurface_mfp;
    if (f == "subsurface_albedo") return &m.subsurface_albedo;
    return nullptr;
}

double* resolve_field(SceneTemplate& s, const std::string& path)
{
    const auto parts = split_path(path);
    if (parts.empty()) {
        return nullptr;
    }
    const auto [head, idx] = split_index(parts[0], path);
    const std::vector<std::string> rest(parts.begin() + 1, parts.end());

    if (head == "material") {
        if (idx < 0 || idx >= static_cast<int>(s.materials.size())) return nullptr;
        return material_field(s.materials[static_cast<std::size_t>(idx)], rest);
    }
    if (head == "spheroid") {
        if (idx < 0 || idx >= static_cast<int>(s.spheroids.size()) || rest.size() != 2) return nullptr;
        Spheroid& sp = s.spheroids[static_cast<std::size_t>(idx)];
        if (rest[0] == "center") return axis_field(sp.center, rest[1]);
        if (rest[0] == "radii" || rest[0] == "semi_axes") return axis_field(sp.radii, rest[1]);
        if (rest[0] == "scale") return axis_field(sp.scale, rest[1]);
        return nullptr;
    }
    if (idx >= 0 || rest.size() != 1) {
        return nullptr;
    }
    const std::string& f = rest[0];
    if (head == "pattern") {
        SinusoidalPattern& p = s.projector.pattern;
        if (f == "spatial_frequency") return &p.spatial_frequency;
        if (f == "phase") return &p.phase;
        if (f == "dc_level") return &p.dc_level;
        if (f == "modulation_depth") return &p.modulation_depth;
        return nullptr;
    }
    if (head == "projector") {
        if (f == "power") return &s.projector.power;
        if (auto* o = std::get_if<Orthographic>(&s.projector.model)) {
            if (f == "half_width") return &o->half_width;
            if (f == "half_height") return &o->half_height;
        }
        if (auto* p = std::get_if<Perspective>(&s.projector.model)) {
            if (f == "throw_deg") return &p->throw_deg;
            if (f == "reference_distance") return &p->reference_distance;
        }
        return nullptr;
    }
    if (head == "camera") {
        if (f == "fov_deg") return &s.camera.fov_deg;
        if (f == "exposure") return &s.camera.exposure;
        return nullptr;
    }
    if (head == "boundary") {
        auto* curve = s.slab ? std::get_if<BoundaryCurve>(&s.slab->partition) : nullptr;
        if (curve == nullptr) return nullptr;
        for (std::size_t i = 0; i < 4; ++i) {
            if (f == "c" + std::to_string(i)) return &curve->coeffs[i];
        }
        return nullptr;
    }
    if (head == "cylinder" && s.cylinder) {
        if (f == "radius") return &s.cylinder->radius;
        if (f == "length") return &s.cylinder->length;
        if (f == "wall_thickness") return &s.cylinder->wall_thickness;
        return nullptr;
    }
    if (head == "backing" && s.backing) {
        if (f == "reflectance") return &s.backing->reflectance;
        if (f == "height") return &s.backing->height;
        return nullptr;
    }
    return nullptr;
}

int as_count(double v, const std::string& key)
{
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e6) {
        config_error(key + " must be a non-negative integer");
    }
    return static_cast<int>(v);
}

// Default tumour placements on the slab face; the first `count` are used.
struct SpheroidDefault {
    Vec3 center;
    Vec3 radii;
};

const std::vector<SpheroidDefault>& slab_tumours()
{
    static const std::vector<SpheroidDefault> defaults{
        {{-8.0, 6.0, -1.5}, {5.0, 4.0, 3.0}},
        {{9.0, -7.0, -1.0}, {4.0, 4.0, 2.5}},
        {{-10.0, -12.0, -2.0}, {3.5, 5.0, 3.0}},
        {{12.0, 10.0, -1.5}, {4.5, 3.5, 3.0}},
    };
    return defaults;
}

// Polyps on the inner wall: (angle deg, axial z, radii).
struct PolypDefault {
    double angle_deg;
    double z;
    Vec3 radii;
};

const std::vector<PolypDefault>& lumen_polyps()
{
    static const std::vector<PolypDefault> defaults{
        {20.0, -30.0, {3.5, 3.5, 4.0}},
        {140.0, -45.0, {4.0, 4.0, 5.0}},
        {260.0, -60.0, {3.0, 3.0, 3.5}},
        {200.0, -38.0, {2.5, 2.5, 3.0}},
    };
    return defaults;
}

Material proxy_material(double final_factor)
{
    Material m;
    m.factors.final_factor = final_factor;
    m.gt_absorption = 1.0 - final_factor;
    m.gt_scattering = final_factor;
    return m;
}

RaggedPartition make_ragged(std::uint64_t seed, const Slab& slab)
{
    RaggedPartition r;
    CounterRng rng(seed, 0x7a66ed);
    constexpr int kSegments = 20;
    constexpr double kJitter = 3.0;
    const double span = slab.hi.x() - slab.lo.x();
    for (int k = 0; k <= kSegments; ++k) {
        const double x = slab.lo.x() + span * k / kSegments;
        r.lower.emplace_back(x, -8.0 + kJitter * (2.0 * rng.uniform() - 1.0));
        r.upper.emplace_back(x, 8.0 + kJitter * (2.0 * rng.uniform() - 1.0));
    }
    return r;
}

void flat_rig(SceneTemplate& s)
{
    s.slab = Slab{};
    s.backing = DiffuseBacking{};
    s.camera.position = Vec3(0.0, 0.0, 100.0);
    s.camera.frame = Frame::look_along(-Vec3::UnitZ(), Vec3::UnitY());
    // 48 mm wide view of the slab top from 100 mm.
    s.camera.fov_deg = 2.0 * std::atan(24.0 / 100.0) / kDegToRad;
    s.projector.position = Vec3(0.0, 0.0, 150.0);
    s.projector.frame = Frame::look_along(-Vec3::UnitZ(), Vec3::UnitY());
    const Orthographic ortho;
    s.projector.model = ortho;
    // A white Lambertian surface under peak illumination maps to 1.0.
    const double area = 4.0 * ortho.half_width * ortho.half_height;
    s.camera.exposure = kPi * area / s.projector.power;
}

void lumen_rig(SceneTemplate& s)
{
    s.cylinder = HollowCylinder{};
    s.camera.position = Vec3(-2.5, 0.0, -2.0);
    s.camera.frame = Frame::look_along(-Vec3::UnitZ(), Vec3::UnitY());
    s.camera.fov_deg = 100.0;
    s.projector.position = Vec3(2.5, 0.0, -2.0);
    s.projector.frame = Frame::look_along(-Vec3::UnitZ(), Vec3::UnitY());
    const Perspective persp;
    s.projector.model = persp;
    const double half = persp.reference_distance * std::tan(0.5 * persp.throw_deg * kDegToRad);
    const double area = 4.0 * half * half;
    // Normalised so a frontal white surface 20 mm from the apex maps to 1.0.
    constexpr double kReferenceRange = 20.0;
    s.camera.exposure = kPi * area / s.projector.power *
                        std::pow(kReferenceRange / persp.reference_distance, 2.0);
}

}  // namespace

std::string hex64(std::uint64_t v)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
        v >>= 4;
    }
    return out;
}

void FactorTriple::validate() const
{
    require(in_unit(final_factor), "factors.final_factor must lie in [0,1]");
    require(in_unit(absorption_factor), "factors.absorption_factor must lie in [0,1]");
    require(in_unit(scattering_factor), "factors.scattering_factor must lie in [0,1]");
}

void Material::validate() const
{
    factors.validate();
    require(in_unit(gt_absorption), "gt_absorption must lie in [0,1]");
    require(in_unit(gt_scattering), "gt_scattering must lie in [0,1]");
    require(hg_g > -1.0 && hg_g < 1.0, "hg_g must lie in (-1,1)");
    require(ior > 1.0 && std::isfinite(ior), "ior must be > 1");
    require(subsurface_mfp > 0.0 && std::isfinite(subsurface_mfp), "subsurface_mfp must be > 0");
    require(in_unit(subsurface_albedo), "subsurface_albedo must lie in [0,1]");
}

double RaggedPartition::polyline_y(const std::vector<Vec2>& line, double x)
{
    if (line.empty()) {
        return 0.0;
    }
    if (x <= line.front().x()) {
        return line.front().y();
    }
    if (x >= line.back().x()) {
        return line.back().y();
    }
    const auto it = std::upper_bound(line.begin(), line.end(), x,
                                     [](double v, const Vec2& p) { return v < p.x(); });
    const Vec2& b = *it;
    const Vec2& a = *(it - 1);
    const double w = (x - a.x()) / (b.x() - a.x());
    return a.y() + w * (b.y() - a.y());
}

bool Slab::contains(const Vec3& p) const
{
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

MaterialId Slab::region_at(double x, double y) const
{
    return std::visit(
        [&](const auto& part) -> MaterialId {
            using T = std::decay_t<decltype(part)>;
            if constexpr (std::is_same_v<T, UniformRegion>) {
                return part.material;
            } else if constexpr (std::is_same_v<T, BoundaryCurve>) {
                return y < part.y_at(x) ? part.below : part.above;
            } else {
                if (y < RaggedPartition::polyline_y(part.lower, x)) return part.materials[0];
                if (y < RaggedPartition::polyline_y(part.upper, x)) return part.materials[1];
                return part.materials[2];
            }
        },
        partition);
}

bool Spheroid::contains(const Vec3& p) const
{
    return (p - center).cwiseQuotient(semi_axes()).squaredNorm() <= 1.0;
}

bool HollowCylinder::contains(const Vec3& p) const
{
    const double r2 = p.x() * p.x() + p.y() * p.y();
    const double rin = inner_radius();
    return p.z() <= 0.0 && p.z() >= -length && r2 >= rin * rin && r2 <= radius * radius;
}

Frame Frame::look_along(const Vec3& forward, const Vec3& up_hint)
{
    Frame f;
    f.forward = forward.normalized();
    f.right = f.forward.cross(up_hint).normalized();
    f.up = f.right.cross(f.forward);
    return f;
}

bool Frame::orthonormal(double tol) const
{
    Eigen::Matrix3d m;
    m << right, up, forward;
    return (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol;
}

Ray Camera::generate_ray(double px, double py) const
{
    const double tan_half = std::tan(0.5 * fov_deg * kDegToRad);
    const double aspect = static_cast<double>(height) / static_cast<double>(width);
    const double x = (2.0 * px / width - 1.0) * tan_half;
    const double y = (1.0 - 2.0 * py / height) * tan_half * aspect;
    return Ray{position, (frame.forward + x * frame.right + y * frame.up).normalized()};
}

void Camera::validate() const
{
    require(width >= 1 && height >= 1, "camera resolution must be at least 1x1");
    require(fov_deg > 0.0 && fov_deg < 180.0, "camera.fov_deg must lie in (0,180)");
    require(frame.orthonormal(), "camera frame must be orthonormal");
    require(exposure > 0.0 && std::isfinite(exposure), "camera.exposure must be > 0");
}

void SinusoidalPattern::validate() const
{
    require(spatial_frequency > 0.0 && std::isfinite(spatial_frequency),
            "pattern.spatial_frequency must be > 0");
    require(std::isfinite(phase), "pattern.phase must be finite");
    require(std::abs(orientation.norm() - 1.0) <= 1e-9, "pattern.orientation must be a unit vector");
    require(in_unit(dc_level), "pattern.dc_level must lie in [0,1]");
    require(in_unit(modulation_depth), "pattern.modulation_depth must lie in [0,1]");
    require(dc_level + modulation_depth <= 1.0 + 1e-12,
            "pattern.dc_level + pattern.modulation_depth must not exceed 1");
}

void Projector::validate() const
{
    require(power >= 0.0 && std::isfinite(power), "projector.power must be >= 0");
    require(frame.orthonormal(), "projector frame must be orthonormal");
    pattern.validate();
    if (const auto* o = std::get_if<Orthographic>(&model)) {
        require(o->half_width > 0.0 && o->half_height > 0.0, "orthographic aperture must have positive area");
    } else {
        const auto& p = std::get<Perspective>(model);
        require(p.throw_deg > 0.0 && p.throw_deg < 180.0, "projector.throw_deg must lie in (0,180)");
        require(p.reference_distance > 0.0, "projector.reference_distance must be > 0");
    }
}

std::string to_string(TemplateName name)
{
    switch (name) {
    case TemplateName::rectangular: return "rectangular";
    case TemplateName::rectangular_curved: return "rectangular_curved";
    case TemplateName::rectangular_ragged: return "rectangular_ragged";
    case TemplateName::rectangular_tumour: return "rectangular_tumour";
    case TemplateName::cylinder_tumour: return "cylinder_tumour";
    }
    return "?";
}

TemplateName template_from_string(const std::string& name)
{
    for (auto t : {TemplateName::rectangular, TemplateName::rectangular_curved, TemplateName::rectangular_ragged,
                   TemplateName::rectangular_tumour, TemplateName::cylinder_tumour}) {
        if (to_string(t) == name) {
            return t;
        }
    }
    config_error("unknown template name: " + name);
}

std::vector<GeometryPrimitive> SceneTemplate::primitives() const
{
    std::vector<GeometryPrimitive> out;
    if (slab) out.emplace_back(*slab);
    if (cylinder) out.emplace_back(*cylinder);
    for (const auto& s : spheroids) out.emplace_back(s);
    return out;
}

void SceneTemplate::validate() const
{
    require(!materials.empty(), "scene has no materials");
    for (std::size_t i = 0; i < materials.size(); ++i) {
        try {
            materials[i].validate();
        } catch (const ConfigError& e) {
            config_error("material[" + std::to_string(i) + "]: " + e.what());
        }
    }
    const auto valid_id = [&](MaterialId id) { return id >= 0 && id < static_cast<int>(materials.size()); };
    require(slab.has_value() || cylinder.has_value(), "scene has no slab or cylinder");
    if (slab) {
        require((slab->hi.array() > slab->lo.array()).all(), "slab extent must be positive");
        std::visit(
            [&](const auto& part) {
                using T = std::decay_t<decltype(part)>;
                if constexpr (std::is_same_v<T, UniformRegion>) {
                    require(valid_id(part.material), "slab region references unknown material");
                } else if constexpr (std::is_same_v<T, BoundaryCurve>) {
                    require(valid_id(part.below) && valid_id(part.above), "boundary curve references unknown material");
                } else {
                    for (MaterialId id : part.materials) {
                        require(valid_id(id), "ragged partition references unknown material");
                    }
                    require(part.lower.size() == part.upper.size() && part.lower.size() >= 2,
                            "ragged partition needs matching polylines");
                    for (std::size_t i = 0; i < part.lower.size(); ++i) {
                        require(part.lower[i].y() < part.upper[i].y(), "ragged polylines must not cross");
                    }
                }
            },
            slab->partition);
    }
    if (cylinder) {
        require(cylinder->wall_thickness > 0.0, "cylinder.wall_thickness must be > 0");
        require(cylinder->radius > cylinder->wall_thickness, "cylinder.radius must exceed wall_thickness");
        require(cylinder->length > 0.0, "cylinder.length must be > 0");
        require(valid_id(cylinder->material), "cylinder references unknown material");
    }
    for (std::size_t i = 0; i < spheroids.size(); ++i) {
        const Spheroid& s = spheroids[i];
        const std::string tag = "spheroid[" + std::to_string(i) + "]";
        require((s.semi_axes().array() > 0.0).all() && s.semi_axes().allFinite(),
                tag + " semi-axes must be strictly positive");
        require(valid_id(s.material), tag + " references unknown material");
        if (slab) {
            require(slab->contains(s.center), tag + ".center lies outside the slab");
        } else {
            const double r2 = s.center.x() * s.center.x() + s.center.y() * s.center.y();
            require(r2 <= cylinder->radius * cylinder->radius && s.center.z() <= 0.0 &&
                        s.center.z() >= -cylinder->length,
                    tag + ".center lies outside the cylinder");
        }
    }
    if (backing) {
        require(in_unit(backing->reflectance), "backing.reflectance must lie in [0,1]");
        if (slab) {
            require(backing->height < slab->lo.z(), "backing must lie below the slab");
        }
    }
    camera.validate();
    projector.validate();
}

SceneTemplate build_template(TemplateName name, const ParameterSet& overrides)
{
    ParameterSet paths = overrides;
    int spheroid_count = name == TemplateName::cylinder_tumour ? 3 : 2;
    std::uint64_t ragged_seed = 7;
    if (auto it = paths.find(kSpheroidCountKey); it != paths.end()) {
        spheroid_count = as_count(it->second, kSpheroidCountKey);
        paths.erase(it);
    }
    if (auto it = paths.find(kRaggedSeedKey); it != paths.end()) {
        ragged_seed = static_cast<std::uint64_t>(as_count(it->second, kRaggedSeedKey));
        paths.erase(it);
    }

    SceneTemplate s;
    s.name = name;
    switch (name) {
    case TemplateName::rectangular:
        flat_rig(s);
        s.materials = {proxy_material(0.5)};
        break;
    case TemplateName::rectangular_curved:
        flat_rig(s);
        s.materials = {proxy_material(0.3), proxy_material(0.7)};
        s.slab->partition = BoundaryCurve{};
        break;
    case TemplateName::rectangular_ragged:
        flat_rig(s);
        s.materials = {proxy_material(0.2), proxy_material(0.5), proxy_material(0.8)};
        s.slab->partition = make_ragged(ragged_seed, *s.slab);
        break;
    case TemplateName::rectangular_tumour: {
        flat_rig(s);
        s.materials = {proxy_material(0.3), proxy_material(0.7), proxy_material(0.9)};
        s.slab->partition = BoundaryCurve{};
        const auto& defaults = slab_tumours();
        if (spheroid_count > static_cast<int>(defaults.size())) {
            config_error("spheroid_count exceeds " + std::to_string(defaults.size()) + " for rectangular_tumour");
        }
        for (int i = 0; i < spheroid_count; ++i) {
            s.spheroids.push_back(Spheroid{defaults[static_cast<std::size_t>(i)].center,
                                           defaults[static_cast<std::size_t>(i)].radii, Vec3::Ones(), 2});
        }
        break;
    }
    case TemplateName::cylinder_tumour: {
        lumen_rig(s);
        s.materials = {proxy_material(0.6), proxy_material(0.2)};
        const auto& defaults = lumen_polyps();
        if (spheroid_count > static_cast<int>(defaults.size())) {
            config_error("spheroid_count exceeds " + std::to_string(defaults.size()) + " for cylinder_tumour");
        }
        const double rin = s.cylinder->inner_radius();
        for (int i = 0; i < spheroid_count; ++i) {
            const auto& d = defaults[static_cast<std::size_t>(i)];
            const double a = d.angle_deg * kDegToRad;
            s.spheroids.push_back(
                Spheroid{Vec3(rin * std::cos(a), rin * std::sin(a), d.z), d.radii, Vec3::Ones(), 1});
        }
        break;
    }
    }
    for (const auto& [path, value] : paths) {
        set_parameter(s, path, value);
    }
    s.validate();
    return s;
}

SceneTemplate build_template(const std::string& name, const ParameterSet& overrides)
{
    return build_template(template_from_string(name), overrides);
}

void set_parameter(SceneTemplate& scene, const std::string& path, double value)
{
    if (!std::isfinite(value)) {
        config_error("non-finite value for parameter: " + path);
    }
    if (path == "camera.width" || path == "camera.height") {
        const int v = as_count(value, path);
        (path == "camera.width" ? scene.camera.width : scene.camera.height) = v;
        return;
    }
    if (path == "pattern.orientation_deg") {
        const double a = value * kDegToRad;
        scene.projector.pattern.orientation = Vec2(std::cos(a), std::sin(a));
        return;
    }
    if (path.starts_with("spheroid[") && path.ends_with("].scale")) {
        const auto [head, idx] = split_index(path.substr(0, path.size() - 6), path);
        if (head != "spheroid" || idx >= static_cast<int>(scene.spheroids.size())) {
            config_error("unresolvable parameter path: " + path);
        }
        scene.spheroids[static_cast<std::size_t>(idx)].scale = Vec3::Constant(value);
        return;
    }
    double* field = resolve_field(scene, path);
    if (field == nullptr) {
        config_error("unresolvable parameter path: " + path);
    }
    *field = value;
}

double get_parameter(const SceneTemplate& scene, const std::string& path)
{
    if (path == "camera.width") return scene.camera.width;
    if (path == "camera.height") return scene.camera.height;
    if (path == "pattern.orientation_deg") {
        const Vec2& o = scene.projector.pattern.orientation;
        return std::atan2(o.y(), o.x()) / kDegToRad;
    }
    if (path.starts_with("spheroid[") && path.ends_with("].scale")) {
        const auto [head, idx] = split_index(path.substr(0, path.size() - 6), path);
        if (head != "spheroid" || idx >= static_cast<int>(scene.spheroids.size())) {
            config_error("unresolvable parameter path: " + path);
        }
        return scene.spheroids[static_cast<std::size_t>(idx)].scale.x();
    }
    double* field = resolve_field(const_cast<SceneTemplate&>(scene), path);
    if (field == nullptr) {
        config_error("unresolvable parameter path: " + path);
    }
    return *field;
}

MaterialId classify_point(const SceneTemplate& scene, const Vec3& p)
{
    for (const Spheroid& s : scene.spheroids) {
        if (s.contains(p)) {
            return s.material;
        }
    }
    if (scene.slab && scene.slab->contains(p)) {
        return scene.slab->region_at(p.x(), p.y());
    }
    if (scene.cylinder && scene.cylinder->contains(p)) {
        return scene.cylinder->material;
    }
    return kBackground;
}

std::optional<SurfaceHit> intersect(const SceneTemplate& scene, const Ray& ray, double tmin, double tmax,
                                    bool include_backing)
{
    Candidate best;
    best.t = tmax;
    if (scene.slab) {
        hit_box(*scene.slab, ray, tmin, best);
    }
    if (scene.cylinder) {
        hit_cylinder(*scene.cylinder, ray, tmin, best);
    }
    for (const Spheroid& s : scene.spheroids) {
        hit_spheroid(s, ray, tmin, best);
    }
    if (include_backing && scene.backing && std::abs(ray.direction.z()) > 1e-300) {
        const double t = (scene.backing->height - ray.origin.z()) / ray.direction.z();
        if (t > tmin) {
            best.offer(t, Vec3::UnitZ(), SurfaceKind::backing);
        }
    }
    if (!(best.t < tmax)) {
        return std::nullopt;
    }
    return SurfaceHit{best.t, ray.at(best.t), best.normal, best.kind};
}

double distance_to_exit(const SceneTemplate& scene, const Ray& ray)
{
    constexpr double kStep = 1e-6;
    constexpr int kMaxCrossings = 256;
    Ray r = ray;
    double travelled = 0.0;
    for (int i = 0; i < kMaxCrossings; ++i) {
        const auto hit = intersect(scene, r, 1e-9, kInfinity, false);
        if (!hit) {
            return kInfinity;
        }
        travelled += hit->t;
        if (classify_point(scene, hit->point + kStep * r.direction) == kBackground) {
            return travelled;
        }
        r.origin = hit->point;
    }
    return travelled;
}

}  // namespace sfdi
