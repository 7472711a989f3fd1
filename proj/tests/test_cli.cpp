#include "sfdi/image.hpp"
#include "sfdi/scene_io.hpp"
#include "sfdi/sweep.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace sfdi;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int status = -1;
    std::string output;
};

CliRun forge(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + (env.empty() ? "" : " ") + SFDI_FORGE_EXE + std::string(" ") + args + " 2>&1";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    while (fgets(buf.data(), buf.size(), pipe) != nullptr) r.output += buf.data();
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("sfdi_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(CliRender, WritesPairAndSidecar)
{
    const fs::path out = scratch("render");
    const CliRun r = forge("render --template rectangular --freq 0.2 --seed 7 --spp 2 --width 16 --height 16 --out " +
                        out.string() + " --name a");
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(out / "a_input.png"));
    EXPECT_TRUE(fs::exists(out / "a_gt.png"));
    const Json side = Json::parse(slurp(out / "a.json"));
    EXPECT_EQ(side.at("render").at("rng_seed").get<std::uint64_t>(), 7u);
    EXPECT_EQ(side.at("render").at("samples_per_pixel").get<int>(), 2);
    EXPECT_TRUE(side.contains("render_seconds"));
    EXPECT_TRUE(side.at("stats").contains("walks_capped"));
    EXPECT_NE(r.output.find("config:"), std::string::npos);
    fs::remove_all(out);
}

TEST(CliRender, Deterministic)
{
    const fs::path out = scratch("det");
    const std::string base = "render --template rectangular_tumour --seed 7 --spp 2 --width 16 --height 16 --out " +
                             out.string();
    ASSERT_EQ(forge(base + " --name a --workers 1").status, 0);
    ASSERT_EQ(forge(base + " --name b --workers 3").status, 0);
    EXPECT_EQ(hash_file(out / "a_input.png"), hash_file(out / "b_input.png"));
    EXPECT_EQ(hash_file(out / "a_gt.png"), hash_file(out / "b_gt.png"));
    fs::remove_all(out);
}

TEST(CliRender, ValidationErrors)
{
    const fs::path out = scratch("bad");
    const CliRun neg = forge("render --template rectangular --freq -1 --out " + out.string());
    EXPECT_NE(neg.status, 0);
    EXPECT_NE(neg.output.find("spatial_frequency"), std::string::npos) << neg.output;
    const CliRun path = forge("render --template rectangular --set material[9].foo=1 --out " + out.string());
    EXPECT_NE(path.status, 0);
    EXPECT_NE(path.output.find("material[9].foo"), std::string::npos) << path.output;
    EXPECT_NE(forge("render --template donut --out " + out.string()).status, 0);
    EXPECT_NE(forge("frobnicate").status, 0);
    fs::remove_all(out);
}

TEST(CliRender, SceneFileAndEnvironmentOutput)
{
    const fs::path dir = scratch("scene");
    fs::create_directories(dir);
    write_text_file(dir / "scene.json",
                    R"({"template": "rectangular_curved", "overrides": {"camera.width": 8, "camera.height": 8}})");
    const CliRun r = forge("render --scene " + (dir / "scene.json").string() + " --spp 1 --name s",
                        "SFDI_FORGE_OUT=" + (dir / "env").string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "env" / "s_input.png"));
    fs::remove_all(dir);
}

TEST(CliRender, ConfigFile)
{
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    write_text_file(dir / "forge.toml", "[render]\nspp = 1\nwidth = 8\nheight = 8\nname = \"cfg\"\nout = \"" +
                                            (dir / "o").string() + "\"\n");
    const CliRun r = forge("--config " + (dir / "forge.toml").string() + " render --template rectangular");
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "o" / "cfg_input.png"));
    fs::remove_all(dir);
}

TEST(CliSweep, RerunSkipsEverything)
{
    const fs::path dir = scratch("sweep");
    fs::create_directories(dir);
    write_text_file(dir / "spec.json", R"({
        "name": "ramp", "template": "rectangular",
        "overrides": {"camera.width": 6, "camera.height": 6},
        "start_frame": 1, "end_frame": 8,
        "tracks": [{"target": "material[0].factors.final_factor", "keyframes": [[1, 0.05], [8, 0.95]]}],
        "render": {"samples_per_pixel": 1}
    })");
    const std::string args = "sweep " + (dir / "spec.json").string() + " --out " + (dir / "out").string();
    const CliRun first = forge(args);
    ASSERT_EQ(first.status, 0) << first.output;
    EXPECT_NE(first.output.find("8 rendered, 0 skipped"), std::string::npos) << first.output;
    EXPECT_NE(first.output.find("frame     1  render"), std::string::npos) << first.output;
    const CliRun second = forge(args);
    EXPECT_NE(second.output.find("0 rendered, 8 skipped"), std::string::npos) << second.output;
    fs::remove_all(dir);
}

TEST(CliSweep, PresetCylinderFull)
{
    const fs::path out = scratch("preset");
    const CliRun r = forge("sweep --preset cylinder-full --width 4 --height 4 --spp 1 --out " + out.string());
    ASSERT_EQ(r.status, 0) << r.output.substr(r.output.size() > 2000 ? r.output.size() - 2000 : 0);
    EXPECT_NE(r.output.find("320 rendered"), std::string::npos);
    EXPECT_EQ(read_manifest(out / kManifestName).size(), 320u);

    const fs::path ds = scratch("preset_ds");
    const CliRun d = forge("dataset " + out.string() + " --out " + ds.string());
    ASSERT_EQ(d.status, 0) << d.output;
    EXPECT_NE(d.output.find("256 train, 64 val"), std::string::npos) << d.output;
    fs::remove_all(out);
    fs::remove_all(ds);
}

TEST(CliSweep, ListPresetsAndErrors)
{
    const CliRun l = forge("sweep --list-presets");
    EXPECT_EQ(l.status, 0);
    EXPECT_NE(l.output.find("rectangular-all"), std::string::npos);
    EXPECT_NE(forge("sweep --preset nope --out " + scratch("np").string()).status, 0);
    EXPECT_NE(forge("sweep").status, 0);
}

TEST(CliDatasetEval, EndToEnd)
{
    const fs::path dir = scratch("e2e");
    const CliRun s = forge("sweep --preset rectangular-complex --width 4 --height 4 --spp 1 --out " +
                        (dir / "sweep").string());
    ASSERT_EQ(s.status, 0);
    const CliRun d = forge("dataset " + (dir / "sweep").string() + " --out " + (dir / "ds").string());
    ASSERT_EQ(d.status, 0) << d.output;
    EXPECT_NE(d.output.find("140 train, 60 val"), std::string::npos) << d.output;

    const CliRun counts = forge("dataset " + (dir / "sweep").string() + " --train 150 --val 50 --seed 4 --out " +
                             (dir / "ds2").string());
    EXPECT_NE(counts.output.find("150 train, 50 val (seed 4)"), std::string::npos) << counts.output;
    EXPECT_NE(forge("dataset " + (dir / "sweep").string() + " --train 190 --val 50 --out " +
                    (dir / "ds3").string())
                  .status,
              0);

    // Evaluating the validation composites against themselves is an exact match.
    const CliRun e = forge("eval " + (dir / "ds" / "val").string() + " " + (dir / "ds" / "val").string() +
                        " --diff-maps --out " + (dir / "eval").string());
    ASSERT_EQ(e.status, 0) << e.output;
    const Json summary = Json::parse(slurp(dir / "eval" / "summary.json"));
    EXPECT_EQ(summary.at("images").get<int>(), 60);
    EXPECT_EQ(summary.at("mean_nmae_absorption").get<double>(), 0.0);
    EXPECT_TRUE(fs::exists(dir / "eval" / "scatter.tsv"));
    EXPECT_TRUE(fs::is_directory(dir / "eval" / "diff_maps"));
    fs::remove_all(dir);
}
