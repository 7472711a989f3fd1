#include "sfdi/presets.hpp"

#include <algorithm>
#include <set>

namespace sfdi {

namespace {

constexpr double kLow = 0.05;
constexpr double kHigh = 0.95;

Track ramp(const std::string& target, int first, int last, double from, double to)
{
    return Track{target, {{first, from}, {last, to}}};
}

// Triangle wave between kLow and kHigh, starting low, with the given full period in frames.
Track zigzag(const std::string& target, int first, int last, int period)
{
    const int half = std::max(1, period / 2);
    Track t{target, {}};
    bool high = false;
    for (int f = first; f < last; f += half) {
        t.keyframes.push_back({f, high ? kHigh : kLow});
        high = !high;
    }
    t.keyframes.push_back({last, high ? kHigh : kLow});
    return t;
}

std::string material_path(int id, const std::string& field)
{
    return "material[" + std::to_string(id) + "]." + field;
}

bool sweeps_abs(FactorSweep k) { return k == FactorSweep::final_abs || k == FactorSweep::all; }
bool sweeps_sct(FactorSweep k) { return k == FactorSweep::final_sct || k == FactorSweep::all; }

// Adds factor tracks for one material plus ground-truth tracks keyed at the union of
// the factor keyframes. The authored mapping is linear in the factors, so interpolating
// the ground truth between those keyframes reproduces it at every frame.
void add_material_tracks(SweepSpec& spec, FactorSweep kind, int id, const Track& final_track, int salt)
{
    const int first = spec.start_frame;
    const int last = spec.end_frame;
    const int n = spec.frame_count();
    std::vector<Track> factor_tracks{final_track};
    factor_tracks.front().target = material_path(id, "factors.final_factor");
    if (sweeps_abs(kind)) {
        factor_tracks.push_back(zigzag(material_path(id, "factors.absorption_factor"), first, last,
                                       std::max(2, n / (5 + salt))));
    }
    if (sweeps_sct(kind)) {
        factor_tracks.push_back(zigzag(material_path(id, "factors.scattering_factor"), first, last,
                                       std::max(2, n / (7 + salt))));
    }

    std::set<int> frames;
    for (const auto& t : factor_tracks) {
        for (const auto& k : t.keyframes) frames.insert(k.frame);
    }
    Track gt_abs{material_path(id, "gt_absorption"), {}};
    Track gt_sct{material_path(id, "gt_scattering"), {}};
    for (int f : frames) {
        FactorTriple ft;
        ft.final_factor = evaluate_track(factor_tracks[0], f);
        for (std::size_t i = 1; i < factor_tracks.size(); ++i) {
            const double v = evaluate_track(factor_tracks[i], f);
            if (factor_tracks[i].target.find("absorption") != std::string::npos) {
                ft.absorption_factor = v;
            } else {
                ft.scattering_factor = v;
            }
        }
        const auto [a, s] = authored_gt(kind, ft);
        gt_abs.keyframes.push_back({f, a});
        gt_sct.keyframes.push_back({f, s});
    }
    for (auto& t : factor_tracks) spec.tracks.push_back(std::move(t));
    spec.tracks.push_back(std::move(gt_abs));
    spec.tracks.push_back(std::move(gt_sct));
}

SweepSpec base_sweep(const std::string& name, TemplateName tmpl, int first, int last, std::uint64_t seed)
{
    SweepSpec s;
    s.name = name;
    s.template_name = tmpl;
    s.start_frame = first;
    s.end_frame = last;
    s.render.rng_seed = seed;
    return s;
}

SweepBundle rectangular_family(FactorSweep kind, const std::string& name)
{
    SweepBundle b;
    b.name = name;
    b.split = SplitPlan{140, 60, 2022};

    SweepSpec flat = base_sweep("rectangular", TemplateName::rectangular, 1, 50, 101);
    add_material_tracks(flat, kind, 0, ramp("", 1, 50, kLow, kHigh), 0);
    b.sweeps.push_back(std::move(flat));

    SweepSpec curved = base_sweep("rectangular_curved", TemplateName::rectangular_curved, 51, 100, 102);
    add_material_tracks(curved, kind, 0, ramp("", 51, 100, kLow, kHigh), 0);
    add_material_tracks(curved, kind, 1, ramp("", 51, 100, kHigh, kLow), 1);
    b.sweeps.push_back(std::move(curved));

    SweepSpec ragged = base_sweep("rectangular_ragged", TemplateName::rectangular_ragged, 101, 150, 103);
    add_material_tracks(ragged, kind, 0, ramp("", 101, 150, kLow, kHigh), 0);
    add_material_tracks(ragged, kind, 1, ramp("", 101, 150, kHigh, kLow), 1);
    add_material_tracks(ragged, kind, 2, zigzag("", 101, 150, 25), 2);
    b.sweeps.push_back(std::move(ragged));

    SweepSpec tumour = base_sweep("rectangular_tumour", TemplateName::rectangular_tumour, 151, 200, 104);
    add_material_tracks(tumour, kind, 0, ramp("", 151, 200, kLow, kHigh), 0);
    add_material_tracks(tumour, kind, 1, ramp("", 151, 200, kHigh, kLow), 1);
    add_material_tracks(tumour, kind, 2, zigzag("", 151, 200, 20), 2);
    tumour.tracks.push_back(ramp("spheroid[0].center.x", 151, 200, -8.0, -2.0));
    tumour.tracks.push_back(ramp("spheroid[0].center.y", 151, 200, 6.0, 0.0));
    tumour.tracks.push_back(ramp("spheroid[0].center.z", 151, 200, -1.5, -0.5));
    tumour.tracks.push_back(ramp("spheroid[0].scale.x", 151, 200, 0.7, 1.3));
    tumour.tracks.push_back(ramp("spheroid[0].scale.y", 151, 200, 0.7, 1.3));
    tumour.tracks.push_back(ramp("spheroid[1].center.x", 151, 200, 9.0, 4.0));
    tumour.tracks.push_back(ramp("spheroid[1].center.y", 151, 200, -7.0, -2.0));
    tumour.tracks.push_back(ramp("spheroid[1].scale.x", 151, 200, 1.2, 0.8));
    tumour.tracks.push_back(ramp("spheroid[1].scale.y", 151, 200, 1.2, 0.8));
    b.sweeps.push_back(std::move(tumour));
    return b;
}

SweepBundle cylinder_family(FactorSweep kind, const std::string& name)
{
    SweepBundle b;
    b.name = name;
    b.split = SplitPlan{256, 64, 2023};

    SweepSpec wall = base_sweep("cylinder_wall", TemplateName::cylinder_tumour, 1, 200, 201);
    wall.overrides[kSpheroidCountKey] = 0;
    add_material_tracks(wall, kind, 0, ramp("", 1, 200, kLow, kHigh), 0);
    b.sweeps.push_back(std::move(wall));

    SweepSpec polyps = base_sweep("cylinder_polyps", TemplateName::cylinder_tumour, 201, 320, 202);
    add_material_tracks(polyps, kind, 0, ramp("", 201, 320, kHigh, kLow), 0);
    add_material_tracks(polyps, kind, 1, zigzag("", 201, 320, 40), 1);
    polyps.tracks.push_back(ramp("spheroid[0].center.z", 201, 320, -30.0, -20.0));
    polyps.tracks.push_back(ramp("spheroid[1].center.z", 201, 320, -45.0, -35.0));
    polyps.tracks.push_back(ramp("spheroid[2].center.z", 201, 320, -60.0, -50.0));
    for (int i = 0; i < 3; ++i) {
        const std::string p = "spheroid[" + std::to_string(i) + "].scale.";
        const double from = i == 1 ? 1.3 : 0.7;
        const double to = i == 1 ? 0.7 : 1.3;
        for (const char* axis : {"x", "y", "z"}) {
            polyps.tracks.push_back(ramp(p + axis, 201, 320, from, to));
        }
    }
    b.sweeps.push_back(std::move(polyps));
    return b;
}

SweepBundle validation_bundle(double frequency, const std::string& name)
{
    SweepBundle b;
    b.name = name;
    SweepSpec rect = base_sweep("rectangular_tumour", TemplateName::rectangular_tumour, 1, 50, 301);
    add_material_tracks(rect, FactorSweep::final_only, 0, ramp("", 1, 50, kHigh, kLow), 0);
    add_material_tracks(rect, FactorSweep::final_only, 2, ramp("", 1, 50, kLow, kHigh), 2);
    rect.tracks.push_back(ramp("spheroid[0].center.x", 1, 50, -4.0, -10.0));
    b.sweeps.push_back(std::move(rect));
    SweepSpec cyl = base_sweep("cylinder_tumour", TemplateName::cylinder_tumour, 51, 100, 302);
    add_material_tracks(cyl, FactorSweep::final_only, 0, ramp("", 51, 100, kLow, kHigh), 0);
    add_material_tracks(cyl, FactorSweep::final_only, 1, ramp("", 51, 100, kHigh, kLow), 1);
    b.sweeps.push_back(std::move(cyl));
    set_bundle_frequency(b, frequency);
    return b;
}

struct PresetEntry {
    const char* name;
    SweepBundle (*make)();
};

const std::vector<PresetEntry>& registry()
{
    static const std::vector<PresetEntry> entries{
        {"rectangular-final", [] { return rectangular_family(FactorSweep::final_only, "rectangular-final"); }},
        {"rectangular-final-abs", [] { return rectangular_family(FactorSweep::final_abs, "rectangular-final-abs"); }},
        {"rectangular-final-sct", [] { return rectangular_family(FactorSweep::final_sct, "rectangular-final-sct"); }},
        {"rectangular-all", [] { return rectangular_family(FactorSweep::all, "rectangular-all"); }},
        {"cylinder-final", [] { return cylinder_family(FactorSweep::final_only, "cylinder-final"); }},
        {"cylinder-final-abs", [] { return cylinder_family(FactorSweep::final_abs, "cylinder-final-abs"); }},
        {"cylinder-final-sct", [] { return cylinder_family(FactorSweep::final_sct, "cylinder-final-sct"); }},
        {"cylinder-all", [] { return cylinder_family(FactorSweep::all, "cylinder-all"); }},
        {"validation-f018", [] { return validation_bundle(0.18, "validation-f018"); }},
        {"validation-f022", [] { return validation_bundle(0.22, "validation-f022"); }},
    };
    return entries;
}

}  // namespace

std::pair<double, double> authored_gt(FactorSweep kind, const FactorTriple& f)
{
    double a = 1.0 - f.final_factor;
    double s = f.final_factor;
    if (sweeps_abs(kind)) a = 0.5 * (a + (1.0 - f.absorption_factor));
    if (sweeps_sct(kind)) s = 0.5 * (s + f.scattering_factor);
    return {a, s};
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (const auto& e : registry()) names.emplace_back(e.name);
    names.emplace_back("rectangular-complex");
    names.emplace_back("cylinder-full");
    return names;
}

SweepBundle make_preset(const std::string& name)
{
    std::string key = name;
    if (key == "rectangular-complex") key = "rectangular-final";
    if (key == "cylinder-full") key = "cylinder-final";
    for (const auto& e : registry()) {
        if (key == e.name) {
            SweepBundle b = e.make();
            b.name = name;
            b.validate();
            return b;
        }
    }
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

void scale_bundle(SweepBundle& bundle, int width, int height, int samples_per_pixel)
{
    for (auto& s : bundle.sweeps) {
        s.overrides["camera.width"] = width;
        s.overrides["camera.height"] = height;
        s.render.samples_per_pixel = samples_per_pixel;
    }
}

void set_bundle_frequency(SweepBundle& bundle, double frequency)
{
    for (auto& s : bundle.sweeps) {
        s.overrides["pattern.spatial_frequency"] = frequency;
    }
}

}  // namespace sfdi
