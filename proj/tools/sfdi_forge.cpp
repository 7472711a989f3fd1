#include "sfdi/dataset.hpp"
#include "sfdi/groundtruth.hpp"
#include "sfdi/metrics.hpp"
#include "sfdi/presets.hpp"
#include "sfdi/scene_io.hpp"
#include "sfdi/sweep.hpp"
#include "sfdi/transport.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace sfdi;

namespace {

void log_config(const std::string& command, const Json& config)
{
    std::cerr << "sfdi-forge " << command << " config: " << config.dump() << "\n";
}

std::string default_out(const std::string& fallback)
{
    if (const char* env = std::getenv("SFDI_FORGE_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return fallback;
}

ParameterSet parse_sets(const std::vector<std::string>& sets)
{
    ParameterSet p;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--set expects path=value, got '" + s + "'");
        }
        const std::string key = s.substr(0, eq);
        const std::string text = s.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size() || text.empty()) {
            throw ConfigError("--set " + key + ": '" + text + "' is not a number");
        }
        p[key] = v;
    }
    return p;
}

struct RenderArgs {
    std::string template_name;
    std::string scene_file;
    std::vector<std::string> sets;
    std::optional<double> freq;
    std::optional<double> phase;
    std::optional<std::uint64_t> seed;
    std::optional<int> spp;
    std::optional<int> bounces;
    std::optional<int> width;
    std::optional<int> height;
    int workers = 0;
    std::string out;
    std::string name = "render";
};

int run_render(const RenderArgs& a)
{
    SceneTemplate scene;
    ParameterSet overrides = parse_sets(a.sets);
    if (a.freq) overrides["pattern.spatial_frequency"] = *a.freq;
    if (a.phase) overrides["pattern.phase"] = *a.phase;
    if (a.width) overrides["camera.width"] = *a.width;
    if (a.height) overrides["camera.height"] = *a.height;
    if (!a.scene_file.empty()) {
        scene = load_scene(a.scene_file);
        for (const auto& [k, v] : overrides) set_parameter(scene, k, v);
        scene.validate();
    } else {
        scene = build_template(a.template_name.empty() ? "rectangular" : a.template_name, overrides);
    }
    RenderSettings rs;
    if (a.seed) rs.rng_seed = *a.seed;
    if (a.spp) rs.samples_per_pixel = *a.spp;
    if (a.bounces) rs.max_bounces = *a.bounces;
    rs.validate();

    const fs::path out = a.out;
    const Json config{{"scene", scene_to_json(scene)}, {"render", settings_to_json(rs)}, {"workers", a.workers},
                      {"out", out.string()}, {"name", a.name}};
    log_config("render", config);

    fs::create_directories(out);
    const RenderResult lit = render(scene, rs, a.workers);
    const auto t0 = std::chrono::steady_clock::now();
    const Image8 gt = render_ground_truth(scene);
    const double gt_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_png(out / (a.name + "_input.png"), lit.image);
    write_png(out / (a.name + "_gt.png"), gt);

    Json sidecar = config;
    sidecar["input"] = a.name + "_input.png";
    sidecar["gt"] = a.name + "_gt.png";
    sidecar["render_seconds"] = lit.stats.seconds;
    sidecar["gt_seconds"] = gt_seconds;
    sidecar["stats"] = Json{{"paths", lit.stats.paths},
                            {"walks", lit.stats.walks},
                            {"walks_escaped", lit.stats.walks_escaped},
                            {"walks_absorbed", lit.stats.walks_absorbed},
                            {"walks_capped", lit.stats.walks_capped},
                            {"roulette_kills", lit.stats.roulette_kills},
                            {"bounce_limit", lit.stats.bounce_limit},
                            {"max_throughput", lit.stats.max_throughput},
                            {"workers", lit.stats.workers}};
    write_text_file(out / (a.name + ".json"), sidecar.dump(2) + "\n");
    std::printf("rendered %s in %.2f s (ground truth %.3f s), %llu capped walks\n", a.name.c_str(),
                lit.stats.seconds, gt_seconds, static_cast<unsigned long long>(lit.stats.walks_capped));
    return 0;
}

struct SweepArgs {
    std::string spec;
    std::string preset;
    std::string out;
    std::optional<double> freq;
    std::optional<int> spp;
    std::optional<int> width;
    std::optional<int> height;
    int workers = 0;
    bool list = false;
};

int run_sweep(const SweepArgs& a)
{
    if (a.list) {
        for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
        return 0;
    }
    if (a.spec.empty() == a.preset.empty()) {
        throw ConfigError("sweep needs exactly one of SPEC or --preset");
    }
    SweepBundle bundle = a.preset.empty() ? load_bundle(a.spec) : make_preset(a.preset);
    if (a.freq) set_bundle_frequency(bundle, *a.freq);
    for (auto& s : bundle.sweeps) {
        if (a.width) s.overrides["camera.width"] = *a.width;
        if (a.height) s.overrides["camera.height"] = *a.height;
        if (a.spp) s.render.samples_per_pixel = *a.spp;
    }
    bundle.validate();
    log_config("sweep", Json{{"bundle", bundle_to_json(bundle)}, {"out", a.out}, {"workers", a.workers}});

    GenerateOptions opts;
    opts.workers = a.workers;
    opts.on_frame = [](const FrameProgress& p) {
        if (!p.error.empty()) {
            std::printf("frame %5d  FAILED: %s\n", p.frame, p.error.c_str());
        } else if (p.skipped) {
            std::printf("frame %5d  skipped\n", p.frame);
        } else {
            std::printf("frame %5d  render %.2f s  gt %.3f s\n", p.frame, p.render_seconds, p.gt_seconds);
        }
        std::fflush(stdout);
    };
    const GenerateReport r = generate(bundle, a.out, opts);
    std::printf("%d rendered, %d skipped, %zu failed in %.1f s\n", r.rendered, r.skipped, r.failures.size(),
                r.seconds);
    for (const auto& f : r.failures) std::fprintf(stderr, "%s\n", f.c_str());
    return r.failures.empty() ? 0 : 1;
}

struct DatasetArgs {
    std::string in;
    std::string out;
    std::optional<int> train;
    std::optional<int> val;
    std::optional<double> val_fraction;
    std::optional<std::uint64_t> seed;
    bool drop_blue = false;
    bool import = false;
    bool swap_halves = false;
};

int run_dataset(const DatasetArgs& a)
{
    DatasetOptions o;
    o.train_count = a.train;
    o.val_count = a.val;
    o.val_fraction = a.val_fraction;
    o.seed = a.seed;
    o.drop_blue = a.drop_blue;
    o.swap_halves = a.swap_halves;
    Json config{{"in", a.in}, {"out", a.out}, {"drop_blue", a.drop_blue}, {"import", a.import},
                {"swap_halves", a.swap_halves}};
    if (a.train) config["train"] = *a.train;
    if (a.val) config["val"] = *a.val;
    if (a.val_fraction) config["val_fraction"] = *a.val_fraction;
    if (a.seed) config["seed"] = *a.seed;
    log_config("dataset", config);
    const DatasetReport r = a.import ? import_composites(a.in, a.out, o) : build_dataset(a.in, a.out, o);
    std::printf("%zu train, %zu val (seed %llu), composites %dx%d\n", r.split.train.size(), r.split.val.size(),
                static_cast<unsigned long long>(r.split.seed), r.width, r.height);
    return 0;
}

struct EvalArgs {
    std::string pred;
    std::string ref;
    std::string out;
    bool physical = false;
    bool scale_correct = false;
    bool diff_maps = false;
};

int run_eval(const EvalArgs& a)
{
    EvalOptions o;
    o.scaling = a.physical ? ChannelScaling::physical() : ChannelScaling::proxy();
    o.scale_correct = a.scale_correct;
    if (a.diff_maps) o.diff_map_dir = fs::path(a.out) / "diff_maps";
    log_config("eval", Json{{"pred", a.pred}, {"ref", a.ref}, {"out", a.out}, {"physical", a.physical},
                            {"scale_correct", a.scale_correct}, {"diff_maps", a.diff_maps}});
    const MetricsReport r = evaluate_dataset(a.pred, a.ref, o);
    write_report(r, a.out);
    std::fputs(report_table(r).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Synthetic SFDI dataset forge"};
    app.set_config("--config", "", "TOML/INI file supplying option values");
    app.require_subcommand(1);

    RenderArgs ra;
    ra.out = default_out("out");
    auto* render_cmd = app.add_subcommand("render", "Render one lit image and its ground-truth map");
    auto* tmpl_opt = render_cmd->add_option("--template", ra.template_name, "Template name");
    render_cmd->add_option("--scene", ra.scene_file, "Scene JSON file")->check(CLI::ExistingFile)->excludes(tmpl_opt);
    render_cmd->add_option("--set", ra.sets, "Parameter override path=value (repeatable)");
    render_cmd->add_option("--freq", ra.freq, "Pattern spatial frequency (mm^-1)");
    render_cmd->add_option("--phase", ra.phase, "Pattern phase (rad)");
    render_cmd->add_option("--seed", ra.seed, "Render seed");
    render_cmd->add_option("--spp", ra.spp, "Samples per pixel");
    render_cmd->add_option("--bounces", ra.bounces, "Maximum path bounces");
    render_cmd->add_option("--width", ra.width, "Image width");
    render_cmd->add_option("--height", ra.height, "Image height");
    render_cmd->add_option("--workers", ra.workers, "Worker threads (0 = all cores)");
    render_cmd->add_option("--out", ra.out, "Output directory (default $SFDI_FORGE_OUT or ./out)");
    render_cmd->add_option("--name", ra.name, "Output file stem");

    SweepArgs sa;
    sa.out = default_out("sweep");
    auto* sweep_cmd = app.add_subcommand("sweep", "Render every frame of a sweep spec or preset bundle");
    sweep_cmd->add_option("spec", sa.spec, "Sweep or bundle JSON file")->check(CLI::ExistingFile);
    sweep_cmd->add_option("--preset", sa.preset, "Preset bundle name");
    sweep_cmd->add_flag("--list-presets", sa.list, "Print preset names and exit");
    sweep_cmd->add_option("--out", sa.out, "Output directory (default $SFDI_FORGE_OUT or ./sweep)");
    sweep_cmd->add_option("--freq", sa.freq, "Override pattern spatial frequency");
    sweep_cmd->add_option("--spp", sa.spp, "Override samples per pixel");
    sweep_cmd->add_option("--width", sa.width, "Override image width");
    sweep_cmd->add_option("--height", sa.height, "Override image height");
    sweep_cmd->add_option("--workers", sa.workers, "Worker threads (0 = all cores)");

    DatasetArgs da;
    da.out = default_out("dataset");
    auto* dataset_cmd = app.add_subcommand("dataset", "Pair and split a sweep directory into train/val composites");
    dataset_cmd->add_option("in", da.in, "Sweep output directory (or composite directory with --import)")
        ->required()
        ->check(CLI::ExistingDirectory);
    dataset_cmd->add_option("--out", da.out, "Output directory");
    auto* train_opt = dataset_cmd->add_option("--train", da.train, "Training count");
    auto* val_opt = dataset_cmd->add_option("--val", da.val, "Validation count");
    dataset_cmd->add_option("--val-fraction", da.val_fraction, "Validation fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->excludes(train_opt)
        ->excludes(val_opt);
    dataset_cmd->add_option("--seed", da.seed, "Split seed");
    dataset_cmd->add_flag("--drop-blue", da.drop_blue, "Zero the blue plane of every composite");
    dataset_cmd->add_flag("--import", da.import, "Treat input as existing 2:1 composites");
    dataset_cmd->add_flag("--swap-halves", da.swap_halves, "Imported composites carry ground truth on the left");

    EvalArgs ea;
    ea.out = default_out("eval");
    auto* eval_cmd = app.add_subcommand("eval", "NMAE report for predicted against reference property maps");
    eval_cmd->add_option("pred", ea.pred, "Prediction directory")->required()->check(CLI::ExistingDirectory);
    eval_cmd->add_option("ref", ea.ref, "Reference directory")->required()->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--out", ea.out, "Report directory");
    eval_cmd->add_flag("--physical", ea.physical, "Scale channels to mm^-1 before comparing");
    eval_cmd->add_flag("--scale-correct", ea.scale_correct, "Fit a per-image scale factor before NMAE");
    eval_cmd->add_flag("--diff-maps", ea.diff_maps, "Write per-pixel difference maps");

    CLI11_PARSE(app, argc, argv);

    try {
        if (render_cmd->parsed()) return run_render(ra);
        if (sweep_cmd->parsed()) return run_sweep(sa);
        if (dataset_cmd->parsed()) return run_dataset(da);
        if (eval_cmd->parsed()) return run_eval(ea);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const ContractError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 1;
}
