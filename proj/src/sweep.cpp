#include "sfdi/sweep.hpp"

#include "sfdi/groundtruth.hpp"
#include "sfdi/image.hpp"
#include "sfdi/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

namespace sfdi {

namespace fs = std::filesystem;

void Track::validate() const
{
    if (target.empty()) {
        throw ConfigError("track has an empty target");
    }
    if (keyframes.empty()) {
        throw ConfigError("track " + target + " has no keyframes");
    }
    for (std::size_t i = 1; i < keyframes.size(); ++i) {
        if (keyframes[i].frame <= keyframes[i - 1].frame) {
            throw ConfigError("track " + target + " keyframe frames must be strictly increasing");
        }
    }
}

double evaluate_track(const Track& track, int frame)
{
    const auto& k = track.keyframes;
    if (frame <= k.front().frame) {
        return k.front().value;
    }
    if (frame >= k.back().frame) {
        return k.back().value;
    }
    const auto hi = std::upper_bound(k.begin(), k.end(), frame,
                                     [](int f, const Keyframe& kf) { return f < kf.frame; });
    const Keyframe& b = *hi;
    const Keyframe& a = *(hi - 1);
    if (frame == a.frame) {
        return a.value;
    }
    const double w = static_cast<double>(frame - a.frame) / static_cast<double>(b.frame - a.frame);
    return a.value + w * (b.value - a.value);
}

void SweepSpec::validate() const
{
    if (start_frame > end_frame) {
        throw ConfigError("sweep " + name + ": start_frame must not exceed end_frame");
    }
    for (const auto& t : tracks) {
        t.validate();
    }
    render.validate();
}

int SweepBundle::frame_count() const
{
    int n = 0;
    for (const auto& s : sweeps) n += s.frame_count();
    return n;
}

void SweepBundle::validate() const
{
    if (sweeps.empty()) {
        throw ConfigError("bundle " + name + " has no sweeps");
    }
    std::vector<std::pair<int, int>> ranges;
    for (const auto& s : sweeps) {
        s.validate();
        ranges.emplace_back(s.start_frame, s.end_frame);
    }
    std::sort(ranges.begin(), ranges.end());
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first <= ranges[i - 1].second) {
            throw ConfigError("bundle " + name + ": sweep frame ranges overlap");
        }
    }
}

std::vector<std::pair<std::string, double>> evaluate_tracks(const SweepSpec& spec, int frame)
{
    std::vector<std::pair<std::string, double>> out;
    out.reserve(spec.tracks.size());
    for (const auto& t : spec.tracks) {
        out.emplace_back(t.target, evaluate_track(t, frame));
    }
    return out;
}

SceneTemplate instantiate_frame(const SweepSpec& spec, int frame)
{
    if (frame < spec.start_frame || frame > spec.end_frame) {
        throw ContractError("frame " + std::to_string(frame) + " outside sweep " + spec.name);
    }
    SceneTemplate scene = build_template(spec.template_name, spec.overrides);
    const auto values = evaluate_tracks(spec, frame);
    for (const auto& [target, value] : values) {
        set_parameter(scene, target, value);
    }
    // A final_factor track without authored ground truth follows the proxy convention.
    const std::string suffix = ".factors.final_factor";
    for (const auto& [target, value] : values) {
        if (target.size() <= suffix.size() || target.compare(target.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        const std::string prefix = target.substr(0, target.size() - suffix.size());
        const bool authored = std::any_of(values.begin(), values.end(), [&](const auto& kv) {
            return kv.first == prefix + ".gt_absorption" || kv.first == prefix + ".gt_scattering";
        });
        if (!authored) {
            set_parameter(scene, prefix + ".gt_absorption", 1.0 - value);
            set_parameter(scene, prefix + ".gt_scattering", value);
        }
    }
    scene.validate();
    return scene;
}

std::uint64_t frame_seed(const SweepSpec& spec, int frame)
{
    return derive_seed(spec.render.rng_seed, static_cast<std::uint64_t>(frame), 0x5eed);
}

Json sweep_to_json(const SweepSpec& spec)
{
    Json tracks = Json::array();
    for (const auto& t : spec.tracks) {
        Json kfs = Json::array();
        for (const auto& k : t.keyframes) kfs.push_back(Json::array({k.frame, k.value}));
        tracks.push_back(Json{{"target", t.target}, {"keyframes", kfs}});
    }
    return Json{{"name", spec.name},
                {"template", to_string(spec.template_name)},
                {"overrides", parameters_to_json(spec.overrides)},
                {"start_frame", spec.start_frame},
                {"end_frame", spec.end_frame},
                {"tracks", tracks},
                {"render", settings_to_json(spec.render)},
                {"ground_truth", Json{{"enabled", spec.ground_truth.enabled}}}};
}

SweepSpec sweep_from_json(const Json& j)
{
    SweepSpec s;
    try {
        s.name = j.value("name", s.name);
        s.template_name = template_from_string(j.at("template").get<std::string>());
        if (j.contains("overrides")) s.overrides = parameters_from_json(j.at("overrides"));
        s.start_frame = j.value("start_frame", s.start_frame);
        s.end_frame = j.value("end_frame", s.end_frame);
        if (j.contains("tracks")) {
            for (const auto& jt : j.at("tracks")) {
                Track t;
                t.target = jt.at("target").get<std::string>();
                for (const auto& k : jt.at("keyframes")) {
                    if (k.is_array()) {
                        t.keyframes.push_back({k.at(0).get<int>(), k.at(1).get<double>()});
                    } else {
                        t.keyframes.push_back({k.at("frame").get<int>(), k.at("value").get<double>()});
                    }
                }
                s.tracks.push_back(std::move(t));
            }
        }
        if (j.contains("render")) s.render = settings_from_json(j.at("render"));
        if (j.contains("ground_truth")) s.ground_truth.enabled = j.at("ground_truth").value("enabled", true);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed sweep spec: ") + e.what());
    }
    s.validate();
    // Surface unresolvable paths before any rendering starts.
    instantiate_frame(s, s.start_frame);
    return s;
}

Json bundle_to_json(const SweepBundle& bundle)
{
    Json sweeps = Json::array();
    for (const auto& s : bundle.sweeps) sweeps.push_back(sweep_to_json(s));
    Json j{{"bundle", bundle.name}, {"sweeps", sweeps}};
    if (bundle.split) {
        j["split"] = Json{{"train", bundle.split->train}, {"val", bundle.split->val}, {"seed", bundle.split->seed}};
    }
    return j;
}

SweepBundle bundle_from_json(const Json& j)
{
    SweepBundle b;
    if (!j.contains("sweeps")) {
        SweepSpec s = sweep_from_json(j);
        b.name = s.name;
        b.sweeps.push_back(std::move(s));
        return b;
    }
    b.name = j.value("bundle", std::string("bundle"));
    for (const auto& js : j.at("sweeps")) {
        b.sweeps.push_back(sweep_from_json(js));
    }
    if (j.contains("split")) {
        const Json& sp = j.at("split");
        b.split = SplitPlan{sp.value("train", 0), sp.value("val", 0), sp.value("seed", std::uint64_t{0})};
    }
    b.validate();
    return b;
}

SweepBundle load_bundle(const fs::path& path)
{
    try {
        return bundle_from_json(read_json_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string frame_file_name(int frame)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%05d.png", frame);
    return buf;
}

std::vector<Json> read_manifest(const fs::path& path)
{
    std::vector<Json> rows;
    std::ifstream in(path);
    if (!in) {
        return rows;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            rows.push_back(Json::parse(line));
        } catch (const Json::exception&) {
            // A torn final line from an interrupted run; the frame is re-rendered.
        }
    }
    return rows;
}

namespace {

void write_manifest(const fs::path& path, const std::map<int, Json>& rows)
{
    const fs::path tmp = path.string() + ".tmp";
    std::string text;
    for (const auto& [frame, row] : rows) {
        text += row.dump() + "\n";
    }
    write_text_file(tmp, text);
    fs::rename(tmp, path);
}

Json record_of(const SweepSpec& spec, int frame, const std::vector<std::pair<std::string, double>>& params)
{
    Json p = Json::object();
    for (const auto& [k, v] : params) p[k] = v;
    RenderSettings rs = spec.render;
    rs.rng_seed = frame_seed(spec, frame);
    return Json{{"template", to_string(spec.template_name)},
                {"overrides", parameters_to_json(spec.overrides)},
                {"params", p},
                {"render", settings_to_json(rs)},
                {"ground_truth", spec.ground_truth.enabled}};
}

bool files_match(const fs::path& out_dir, const Json& row)
{
    try {
        const fs::path input = out_dir / row.at("input").get<std::string>();
        if (!fs::exists(input) || hex64(hash_file(input)) != row.at("input_hash").get<std::string>()) {
            return false;
        }
        if (row.contains("gt") && !row.at("gt").is_null()) {
            const fs::path gt = out_dir / row.at("gt").get<std::string>();
            if (!fs::exists(gt) || hex64(hash_file(gt)) != row.at("gt_hash").get<std::string>()) {
                return false;
            }
        }
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

GenerateReport generate(const SweepBundle& bundle, const fs::path& out_dir, const GenerateOptions& options)
{
    bundle.validate();
    const auto start = std::chrono::steady_clock::now();
    GenerateReport report;
    fs::create_directories(out_dir / kInputDir);
    fs::create_directories(out_dir / kGroundTruthDir);
    const fs::path manifest = out_dir / kManifestName;
    write_text_file(out_dir / kBundleFileName, bundle_to_json(bundle).dump(2) + "\n");

    std::map<int, Json> rows;
    for (auto& row : read_manifest(manifest)) {
        if (row.contains("frame")) {
            const int frame = row.at("frame").get<int>();
            rows[frame] = std::move(row);
        }
    }

    for (const SweepSpec& spec : bundle.sweeps) {
        for (int frame = spec.start_frame; frame <= spec.end_frame; ++frame) {
            FrameProgress progress;
            progress.frame = frame;
            const auto params = evaluate_tracks(spec, frame);
            const Json record = record_of(spec, frame, params);
            const std::string record_hash = hex64(fnv1a64(record.dump()));

            if (auto it = rows.find(frame); it != rows.end() &&
                                            it->second.value("record_hash", std::string()) == record_hash &&
                                            files_match(out_dir, it->second)) {
                ++report.skipped;
                progress.skipped = true;
                if (options.on_frame) options.on_frame(progress);
                continue;
            }

            try {
                const SceneTemplate scene = instantiate_frame(spec, frame);
                RenderSettings rs = spec.render;
                rs.rng_seed = frame_seed(spec, frame);
                const RenderResult lit = render(scene, rs, options.workers);
                const std::string name = frame_file_name(frame);
                const fs::path input_rel = fs::path(kInputDir) / name;
                write_png(out_dir / input_rel, lit.image);

                Json row;
                row["frame"] = frame;
                row["sweep"] = spec.name;
                row["template"] = to_string(spec.template_name);
                row["params"] = record.at("params");
                row["overrides"] = record.at("overrides");
                row["seed"] = rs.rng_seed;
                row["samples_per_pixel"] = rs.samples_per_pixel;
                row["width"] = scene.camera.width;
                row["height"] = scene.camera.height;
                row["input"] = input_rel.string();
                row["input_hash"] = hex64(hash_file(out_dir / input_rel));
                row["gt"] = nullptr;
                row["gt_hash"] = nullptr;
                progress.render_seconds = lit.stats.seconds;

                if (spec.ground_truth.enabled) {
                    const auto t0 = std::chrono::steady_clock::now();
                    const Image8 gt = render_ground_truth(scene);
                    const fs::path gt_rel = fs::path(kGroundTruthDir) / name;
                    write_png(out_dir / gt_rel, gt);
                    progress.gt_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    row["gt"] = gt_rel.string();
                    row["gt_hash"] = hex64(hash_file(out_dir / gt_rel));
                }
                row["record_hash"] = record_hash;
                row["render_seconds"] = progress.render_seconds;
                row["gt_seconds"] = progress.gt_seconds;
                row["walks_capped"] = lit.stats.walks_capped;
                rows[frame] = std::move(row);
                write_manifest(manifest, rows);
                ++report.rendered;
            } catch (const IoError& e) {
                progress.error = e.what();
                report.failures.push_back("frame " + std::to_string(frame) + ": " + e.what());
            } catch (const fs::filesystem_error& e) {
                progress.error = e.what();
                report.failures.push_back("frame " + std::to_string(frame) + ": " + e.what());
            }
            if (options.on_frame) options.on_frame(progress);
        }
    }
    write_manifest(manifest, rows);
    for (auto& [frame, row] : rows) {
        report.rows.push_back(row);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

GenerateReport generate(const SweepSpec& spec, const fs::path& out_dir, const GenerateOptions& options)
{
    SweepBundle b;
    b.name = spec.name;
    b.sweeps.push_back(spec);
    return generate(b, out_dir, options);
}

}  // namespace sfdi
