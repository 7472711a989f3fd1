#include "sfdi/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sfdi {

namespace {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json vec(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Vec3 vec3(const Json& j, const char* key, const Vec3& fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3) {
        throw ConfigError(std::string(key) + " must be a 3-element array");
    }
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

Vec2 vec2(const Json& a)
{
    if (!a.is_array() || a.size() != 2) {
        throw ConfigError("expected a 2-element array");
    }
    return {a[0].get<double>(), a[1].get<double>()};
}

Json material_json(const Material& m)
{
    return Json{{"factors",
                 {{"final_factor", m.factors.final_factor},
                  {"absorption_factor", m.factors.absorption_factor},
                  {"scattering_factor", m.factors.scattering_factor}}},
                {"gt_absorption", m.gt_absorption},
                {"gt_scattering", m.gt_scattering},
                {"hg_g", m.hg_g},
                {"ior", m.ior},
                {"subsurface_mfp", m.subsurface_mfp},
                {"subsurface_albedo", m.subsurface_albedo}};
}

Material material_from(const Json& j)
{
    Material m;
    if (j.contains("factors")) {
        const Json& f = j.at("factors");
        m.factors.final_factor = f.value("final_factor", m.factors.final_factor);
        m.factors.absorption_factor = f.value("absorption_factor", m.factors.absorption_factor);
        m.factors.scattering_factor = f.value("scattering_factor", m.factors.scattering_factor);
    }
    m.gt_absorption = j.value("gt_absorption", m.gt_absorption);
    m.gt_scattering = j.value("gt_scattering", m.gt_scattering);
    m.hg_g = j.value("hg_g", m.hg_g);
    m.ior = j.value("ior", m.ior);
    m.subsurface_mfp = j.value("subsurface_mfp", m.subsurface_mfp);
    m.subsurface_albedo = j.value("subsurface_albedo", m.subsurface_albedo);
    return m;
}

Json frame_json(const Vec3& position, const Frame& f)
{
    return Json{{"position", vec(position)}, {"forward", vec(f.forward)}, {"up", vec(f.up)}};
}

Frame frame_from(const Json& j, const Frame& fallback)
{
    const Vec3 forward = vec3(j, "forward", fallback.forward);
    const Vec3 up = vec3(j, "up", fallback.up);
    if (forward.norm() == 0.0 || forward.cross(up).norm() < 1e-12) {
        throw ConfigError("frame forward/up must be non-zero and non-parallel");
    }
    return Frame::look_along(forward, up);
}

Json partition_json(const SlabPartition& p)
{
    return std::visit(
        [](const auto& part) -> Json {
            using T = std::decay_t<decltype(part)>;
            if constexpr (std::is_same_v<T, UniformRegion>) {
                return Json{{"type", "uniform"}, {"material", part.material}};
            } else if constexpr (std::is_same_v<T, BoundaryCurve>) {
                return Json{{"type", "curve"},
                            {"coeffs", Json::array({part.coeffs[0], part.coeffs[1], part.coeffs[2], part.coeffs[3]})},
                            {"below", part.below},
                            {"above", part.above}};
            } else {
                Json lower = Json::array();
                Json upper = Json::array();
                for (const auto& v : part.lower) lower.push_back(vec(v));
                for (const auto& v : part.upper) upper.push_back(vec(v));
                return Json{{"type", "ragged"},
                            {"lower", lower},
                            {"upper", upper},
                            {"materials", Json::array({part.materials[0], part.materials[1], part.materials[2]})}};
            }
        },
        p);
}

SlabPartition partition_from(const Json& j)
{
    const std::string type = j.value("type", "uniform");
    if (type == "uniform") {
        return UniformRegion{j.value("material", 0)};
    }
    if (type == "curve") {
        BoundaryCurve c;
        if (j.contains("coeffs")) {
            const auto& a = j.at("coeffs");
            if (!a.is_array() || a.size() != 4) throw ConfigError("slab.partition.coeffs must have 4 entries");
            for (std::size_t i = 0; i < 4; ++i) c.coeffs[i] = a[i].get<double>();
        }
        c.below = j.value("below", c.below);
        c.above = j.value("above", c.above);
        return c;
    }
    if (type == "ragged") {
        RaggedPartition r;
        for (const auto& v : j.at("lower")) r.lower.push_back(vec2(v));
        for (const auto& v : j.at("upper")) r.upper.push_back(vec2(v));
        if (j.contains("materials")) {
            const auto& a = j.at("materials");
            if (!a.is_array() || a.size() != 3) throw ConfigError("slab.partition.materials must have 3 entries");
            for (std::size_t i = 0; i < 3; ++i) r.materials[i] = a[i].get<int>();
        }
        return r;
    }
    throw ConfigError("unknown slab.partition.type: " + type);
}

SceneTemplate explicit_scene(const Json& j)
{
    SceneTemplate s;
    if (j.contains("template")) {
        s.name = template_from_string(j.at("template").get<std::string>());
    }
    for (const auto& m : j.at("materials")) {
        s.materials.push_back(material_from(m));
    }
    if (j.contains("slab")) {
        const Json& js = j.at("slab");
        Slab slab;
        slab.lo = vec3(js, "lo", slab.lo);
        slab.hi = vec3(js, "hi", slab.hi);
        if (js.contains("partition")) slab.partition = partition_from(js.at("partition"));
        s.slab = slab;
    }
    if (j.contains("cylinder")) {
        const Json& jc = j.at("cylinder");
        HollowCylinder c;
        c.radius = jc.value("radius", c.radius);
        c.length = jc.value("length", c.length);
        c.wall_thickness = jc.value("wall_thickness", c.wall_thickness);
        c.material = jc.value("material", c.material);
        s.cylinder = c;
    }
    if (j.contains("spheroids")) {
        for (const auto& js : j.at("spheroids")) {
            Spheroid sp;
            sp.center = vec3(js, "center", sp.center);
            sp.radii = vec3(js, "radii", sp.radii);
            sp.scale = vec3(js, "scale", sp.scale);
            sp.material = js.value("material", sp.material);
            s.spheroids.push_back(sp);
        }
    }
    if (j.contains("backing")) {
        DiffuseBacking b;
        b.height = j.at("backing").value("height", b.height);
        b.reflectance = j.at("backing").value("reflectance", b.reflectance);
        s.backing = b;
    }
    if (j.contains("camera")) {
        const Json& jc = j.at("camera");
        Camera& c = s.camera;
        c.position = vec3(jc, "position", c.position);
        c.frame = frame_from(jc, c.frame);
        c.fov_deg = jc.value("fov_deg", c.fov_deg);
        c.width = jc.value("width", c.width);
        c.height = jc.value("height", c.height);
        c.exposure = jc.value("exposure", c.exposure);
    }
    if (j.contains("projector")) {
        const Json& jp = j.at("projector");
        Projector& p = s.projector;
        p.position = vec3(jp, "position", p.position);
        p.frame = frame_from(jp, p.frame);
        p.power = jp.value("power", p.power);
        if (jp.contains("model")) {
            const Json& jm = jp.at("model");
            const std::string type = jm.value("type", "orthographic");
            if (type == "orthographic") {
                Orthographic o;
                o.half_width = jm.value("half_width", o.half_width);
                o.half_height = jm.value("half_height", o.half_height);
                p.model = o;
            } else if (type == "perspective") {
                Perspective pp;
                pp.throw_deg = jm.value("throw_deg", pp.throw_deg);
                pp.reference_distance = jm.value("reference_distance", pp.reference_distance);
                p.model = pp;
            } else {
                throw ConfigError("unknown projector.model.type: " + type);
            }
        }
        if (jp.contains("pattern")) {
            const Json& jt = jp.at("pattern");
            SinusoidalPattern& t = p.pattern;
            t.spatial_frequency = jt.value("spatial_frequency", t.spatial_frequency);
            t.phase = jt.value("phase", t.phase);
            if (jt.contains("orientation")) t.orientation = vec2(jt.at("orientation"));
            t.dc_level = jt.value("dc_level", t.dc_level);
            t.modulation_depth = jt.value("modulation_depth", t.modulation_depth);
        }
    }
    return s;
}

}  // namespace

Json scene_to_json(const SceneTemplate& s)
{
    Json j;
    j["template"] = to_string(s.name);
    Json mats = Json::array();
    for (const auto& m : s.materials) mats.push_back(material_json(m));
    j["materials"] = mats;
    if (s.slab) {
        j["slab"] = Json{{"lo", vec(s.slab->lo)}, {"hi", vec(s.slab->hi)}, {"partition", partition_json(s.slab->partition)}};
    }
    if (s.cylinder) {
        j["cylinder"] = Json{{"radius", s.cylinder->radius},
                             {"length", s.cylinder->length},
                             {"wall_thickness", s.cylinder->wall_thickness},
                             {"material", s.cylinder->material}};
    }
    Json sph = Json::array();
    for (const auto& sp : s.spheroids) {
        sph.push_back(Json{{"center", vec(sp.center)}, {"radii", vec(sp.radii)}, {"scale", vec(sp.scale)}, {"material", sp.material}});
    }
    j["spheroids"] = sph;
    if (s.backing) {
        j["backing"] = Json{{"height", s.backing->height}, {"reflectance", s.backing->reflectance}};
    }
    Json cam = frame_json(s.camera.position, s.camera.frame);
    cam["fov_deg"] = s.camera.fov_deg;
    cam["width"] = s.camera.width;
    cam["height"] = s.camera.height;
    cam["exposure"] = s.camera.exposure;
    j["camera"] = cam;
    Json proj = frame_json(s.projector.position, s.projector.frame);
    proj["power"] = s.projector.power;
    if (const auto* o = std::get_if<Orthographic>(&s.projector.model)) {
        proj["model"] = Json{{"type", "orthographic"}, {"half_width", o->half_width}, {"half_height", o->half_height}};
    } else {
        const auto& p = std::get<Perspective>(s.projector.model);
        proj["model"] = Json{{"type", "perspective"}, {"throw_deg", p.throw_deg}, {"reference_distance", p.reference_distance}};
    }
    const SinusoidalPattern& t = s.projector.pattern;
    proj["pattern"] = Json{{"spatial_frequency", t.spatial_frequency},
                           {"phase", t.phase},
                           {"orientation", vec(t.orientation)},
                           {"dc_level", t.dc_level},
                           {"modulation_depth", t.modulation_depth}};
    j["projector"] = proj;
    return j;
}

SceneTemplate scene_from_json(const Json& j)
{
    try {
        ParameterSet overrides;
        if (j.contains("overrides")) {
            overrides = parameters_from_json(j.at("overrides"));
        }
        if (!j.contains("materials")) {
            if (!j.contains("template")) {
                throw ConfigError("scene file needs either \"template\" or \"materials\"");
            }
            return build_template(j.at("template").get<std::string>(), overrides);
        }
        SceneTemplate s = explicit_scene(j);
        for (const auto& [path, value] : overrides) {
            set_parameter(s, path, value);
        }
        s.validate();
        return s;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed scene description: ") + e.what());
    }
}

SceneTemplate load_scene(const std::filesystem::path& path)
{
    try {
        return scene_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void save_scene(const std::filesystem::path& path, const SceneTemplate& scene)
{
    write_text_file(path, scene_to_json(scene).dump(2) + "\n");
}

Json settings_to_json(const RenderSettings& s)
{
    return Json{{"samples_per_pixel", s.samples_per_pixel},
                {"max_bounces", s.max_bounces},
                {"roulette_start", s.roulette_start},
                {"roulette_survival", s.roulette_survival},
                {"rng_seed", s.rng_seed},
                {"tile_size", s.tile_size},
                {"walk_step_cap", s.walk_step_cap}};
}

RenderSettings settings_from_json(const Json& j, RenderSettings s)
{
    try {
        s.samples_per_pixel = j.value("samples_per_pixel", s.samples_per_pixel);
        s.max_bounces = j.value("max_bounces", s.max_bounces);
        s.roulette_start = j.value("roulette_start", s.roulette_start);
        s.roulette_survival = j.value("roulette_survival", s.roulette_survival);
        s.rng_seed = j.value("rng_seed", s.rng_seed);
        s.tile_size = j.value("tile_size", s.tile_size);
        s.walk_step_cap = j.value("walk_step_cap", s.walk_step_cap);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed render settings: ") + e.what());
    }
    s.validate();
    return s;
}

ParameterSet parameters_from_json(const Json& j)
{
    if (!j.is_object()) {
        throw ConfigError("overrides must be an object of path: number pairs");
    }
    ParameterSet p;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) {
            throw ConfigError("override " + key + " must be a number");
        }
        p[key] = value.get<double>();
    }
    return p;
}

Json parameters_to_json(const ParameterSet& p)
{
    Json j = Json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace sfdi
