#include "sfdi/groundtruth.hpp"
#include "sfdi/image.hpp"
#include "sfdi/presets.hpp"
#include "sfdi/sweep.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>

using namespace sfdi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("sfdi_test_sweep_" + name);
    fs::remove_all(p);
    return p;
}

SweepSpec tiny_spec(int frames)
{
    SweepSpec s;
    s.name = "tiny";
    s.template_name = TemplateName::rectangular_tumour;
    s.overrides = {{"camera.width", 12}, {"camera.height", 12}};
    s.start_frame = 1;
    s.end_frame = frames;
    s.tracks = {Track{"material[0].factors.final_factor", {{1, 0.05}, {frames, 0.95}}},
                Track{"spheroid[0].scale.x", {{1, 0.8}, {frames, 1.2}}}};
    s.render.samples_per_pixel = 1;
    s.render.rng_seed = 99;
    return s;
}

}  // namespace

TEST(EvaluateTrack, EndpointsAndInterior)
{
    const Track t{"x", {{1, 0.05}, {100, 0.95}}};
    EXPECT_DOUBLE_EQ(evaluate_track(t, 1), 0.05);
    EXPECT_DOUBLE_EQ(evaluate_track(t, 100), 0.95);
    EXPECT_NEAR(evaluate_track(t, 50), 0.4955, 5e-5);
    EXPECT_NEAR(evaluate_track(t, 50), 0.05 + 0.9 * 49.0 / 99.0, 1e-15);
}

TEST(EvaluateTrack, SingleKeyframeIsConstant)
{
    const Track t{"x", {{10, 0.3}}};
    for (int f : {-5, 1, 10, 1000}) EXPECT_DOUBLE_EQ(evaluate_track(t, f), 0.3);
}

TEST(EvaluateTrack, ClampedOutsideRange)
{
    const Track t{"x", {{5, 1.0}, {9, 2.0}}};
    EXPECT_DOUBLE_EQ(evaluate_track(t, 0), 1.0);
    EXPECT_DOUBLE_EQ(evaluate_track(t, 20), 2.0);
}

TEST(EvaluateTrack, PiecewiseLinear)
{
    const Track t{"x", {{1, 0.05}, {13, 0.9}, {40, 0.1}, {41, 0.7}, {100, 0.95}}};
    for (std::size_t k = 1; k < t.keyframes.size(); ++k) {
        for (int f = t.keyframes[k - 1].frame + 1; f + 1 < t.keyframes[k].frame; ++f) {
            const double mid = 0.5 * (evaluate_track(t, f - 1) + evaluate_track(t, f + 1));
            EXPECT_NEAR(evaluate_track(t, f), mid, 1e-12) << f;
        }
        EXPECT_DOUBLE_EQ(evaluate_track(t, t.keyframes[k].frame), t.keyframes[k].value);
    }
}

TEST(Track, ValidationRejectsUnorderedKeyframes)
{
    EXPECT_THROW((Track{"x", {{5, 1.0}, {5, 2.0}}}.validate()), ConfigError);
    EXPECT_THROW((Track{"x", {}}.validate()), ConfigError);
}

TEST(InstantiateFrame, FinalFactorTrackDrivesProportions)
{
    SweepSpec s;
    s.template_name = TemplateName::rectangular;
    s.tracks = {Track{"material[0].factors.final_factor", {{1, 0.05}, {100, 0.95}}}};
    const SceneTemplate first = instantiate_frame(s, 1);
    EXPECT_DOUBLE_EQ(first.materials[0].factors.final_factor, 0.05);
    EXPECT_DOUBLE_EQ(first.materials[0].gt_absorption, 0.95);
    EXPECT_DOUBLE_EQ(first.materials[0].gt_scattering, 0.05);
    const SceneTemplate last = instantiate_frame(s, 100);
    EXPECT_DOUBLE_EQ(last.materials[0].gt_absorption, 1.0 - 0.95);
    EXPECT_DOUBLE_EQ(last.materials[0].gt_scattering, 0.95);
}

TEST(InstantiateFrame, AuthoredGroundTruthWins)
{
    SweepSpec s;
    s.template_name = TemplateName::rectangular;
    s.tracks = {Track{"material[0].factors.final_factor", {{1, 0.05}, {100, 0.95}}},
                Track{"material[0].gt_absorption", {{1, 0.3}}}};
    const SceneTemplate f = instantiate_frame(s, 1);
    EXPECT_DOUBLE_EQ(f.materials[0].gt_absorption, 0.3);
}

TEST(InstantiateFrame, ScaleTrackReachesSemiAxes)
{
    const SweepSpec s = tiny_spec(11);
    const SceneTemplate f = instantiate_frame(s, 6);
    EXPECT_NEAR(f.spheroids[0].scale.x(), 1.0, 1e-12);
    const SceneTemplate g = instantiate_frame(s, 11);
    EXPECT_NEAR(g.spheroids[0].semi_axes().x(), 1.2 * g.spheroids[0].radii.x(), 1e-12);
}

TEST(InstantiateFrame, Errors)
{
    SweepSpec s = tiny_spec(5);
    EXPECT_THROW(instantiate_frame(s, 0), ContractError);
    EXPECT_THROW(instantiate_frame(s, 6), ContractError);
    s.tracks.push_back(Track{"material[9].foo", {{1, 0.0}}});
    try {
        instantiate_frame(s, 1);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("material[9].foo"), std::string::npos);
    }
}

TEST(SweepJson, RoundTrip)
{
    const SweepSpec s = tiny_spec(7);
    const Json j = sweep_to_json(s);
    EXPECT_EQ(sweep_to_json(sweep_from_json(j)).dump(), j.dump());
    const SweepBundle b = bundle_from_json(j);
    ASSERT_EQ(b.sweeps.size(), 1u);
    EXPECT_EQ(b.frame_count(), 7);
}

TEST(SweepJson, BadTrackPathRejectedOnLoad)
{
    Json j = sweep_to_json(tiny_spec(3));
    j["tracks"].push_back(Json{{"target", "camera.zoom"}, {"keyframes", Json::array({Json::array({1, 2.0})})}});
    EXPECT_THROW(sweep_from_json(j), ConfigError);
}

TEST(SweepBundle, OverlappingRangesRejected)
{
    SweepBundle b;
    b.name = "b";
    b.sweeps = {tiny_spec(5), tiny_spec(5)};
    EXPECT_THROW(b.validate(), ConfigError);
    b.sweeps[1].start_frame = 6;
    b.sweeps[1].end_frame = 8;
    EXPECT_NO_THROW(b.validate());
}

TEST(FrameFileName, ZeroPadded)
{
    EXPECT_EQ(frame_file_name(1), "frame_00001.png");
    EXPECT_EQ(frame_file_name(320), "frame_00320.png");
}

TEST(Generate, HundredFramesHundredRows)
{
    const fs::path out = scratch("hundred");
    SweepSpec s = tiny_spec(100);
    s.overrides["camera.width"] = 6;
    s.overrides["camera.height"] = 6;
    const GenerateReport r = generate(s, out);
    EXPECT_EQ(r.rendered, 100);
    EXPECT_EQ(read_manifest(out / kManifestName).size(), 100u);
    int inputs = 0, gts = 0;
    for (auto& e : fs::directory_iterator(out / kInputDir)) inputs += e.is_regular_file();
    for (auto& e : fs::directory_iterator(out / kGroundTruthDir)) gts += e.is_regular_file();
    EXPECT_EQ(inputs, 100);
    EXPECT_EQ(gts, 100);
    fs::remove_all(out);
}

TEST(Generate, ResumeSkipsCompletedFrames)
{
    const fs::path out = scratch("resume");
    const SweepSpec s = tiny_spec(6);
    EXPECT_EQ(generate(s, out).rendered, 6);

    const GenerateReport again = generate(s, out);
    EXPECT_EQ(again.rendered, 0);
    EXPECT_EQ(again.skipped, 6);

    fs::remove(out / kInputDir / frame_file_name(3));
    const GenerateReport patched = generate(s, out);
    EXPECT_EQ(patched.rendered, 1);
    EXPECT_EQ(patched.skipped, 5);

    SweepSpec changed = s;
    changed.render.samples_per_pixel = 2;
    EXPECT_EQ(generate(changed, out).rendered, 6);
    fs::remove_all(out);
}

TEST(Generate, ManifestCompletenessAndReproduction)
{
    const fs::path out = scratch("manifest");
    const SweepSpec s = tiny_spec(5);
    generate(s, out);
    const auto rows = read_manifest(out / kManifestName);
    ASSERT_EQ(rows.size(), 5u);

    std::multiset<std::string> referenced;
    int prev = 0;
    for (const Json& row : rows) {
        const int frame = row.at("frame").get<int>();
        EXPECT_GT(frame, prev);
        prev = frame;
        referenced.insert(row.at("input").get<std::string>());
        referenced.insert(row.at("gt").get<std::string>());

        // Re-instantiate from the recorded parameters alone and re-render.
        SceneTemplate scene = build_template(row.at("template").get<std::string>(),
                                             parameters_from_json(row.at("overrides")));
        for (const auto& [k, v] : row.at("params").items()) set_parameter(scene, k, v.get<double>());
        scene.materials[0].gt_absorption = 1.0 - scene.materials[0].factors.final_factor;
        scene.materials[0].gt_scattering = scene.materials[0].factors.final_factor;
        RenderSettings rs = s.render;
        rs.rng_seed = row.at("seed").get<std::uint64_t>();
        rs.samples_per_pixel = row.at("samples_per_pixel").get<int>();
        const fs::path tmp = out / "check.png";
        write_png(tmp, render(scene, rs, 2).image);
        EXPECT_EQ(hex64(hash_file(tmp)), row.at("input_hash").get<std::string>());
        write_png(tmp, render_ground_truth(scene));
        EXPECT_EQ(hex64(hash_file(tmp)), row.at("gt_hash").get<std::string>());
        fs::remove(tmp);
    }
    std::multiset<std::string> on_disk;
    for (const char* dir : {kInputDir, kGroundTruthDir}) {
        for (auto& e : fs::directory_iterator(out / dir)) {
            on_disk.insert((fs::path(dir) / e.path().filename()).string());
        }
    }
    EXPECT_EQ(referenced, on_disk);
    fs::remove_all(out);
}

TEST(Generate, WorkerCountDoesNotChangeOutput)
{
    const fs::path a = scratch("w1"), b = scratch("w4");
    const SweepSpec s = tiny_spec(3);
    generate(s, a, {1, {}});
    generate(s, b, {4, {}});
    for (int f = 1; f <= 3; ++f) {
        EXPECT_EQ(hash_file(a / kInputDir / frame_file_name(f)), hash_file(b / kInputDir / frame_file_name(f)));
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Presets, FamilySizes)
{
    const SweepBundle rect = make_preset("rectangular-complex");
    EXPECT_EQ(rect.frame_count(), 200);
    EXPECT_EQ(rect.sweeps.size(), 4u);
    for (const auto& s : rect.sweeps) EXPECT_EQ(s.frame_count(), 50);
    ASSERT_TRUE(rect.split.has_value());
    EXPECT_EQ(rect.split->train, 140);
    EXPECT_EQ(rect.split->val, 60);

    const SweepBundle cyl = make_preset("cylinder-full");
    EXPECT_EQ(cyl.frame_count(), 320);
    ASSERT_TRUE(cyl.split.has_value());
    EXPECT_EQ(cyl.split->train, 256);
    EXPECT_EQ(cyl.split->val, 64);
    EXPECT_THROW(make_preset("nonsense"), ConfigError);
}

TEST(Presets, FactorTableBundlesInstantiateEveryFrame)
{
    for (const char* geom : {"rectangular", "cylinder"}) {
        for (const char* kind : {"-final", "-final-abs", "-final-sct", "-all"}) {
            const SweepBundle b = make_preset(std::string(geom) + kind);
            for (const auto& s : b.sweeps) {
                for (int f = s.start_frame; f <= s.end_frame; ++f) {
                    const SceneTemplate scene = instantiate_frame(s, f);
                    for (const auto& m : scene.materials) {
                        ASSERT_GE(m.gt_absorption, 0.05 - 1e-12);
                        ASSERT_LE(m.gt_absorption, 0.95 + 1e-12);
                        ASSERT_GE(m.gt_scattering, 0.05 - 1e-12);
                        ASSERT_LE(m.gt_scattering, 0.95 + 1e-12);
                    }
                }
            }
        }
    }
}

TEST(Presets, SweptFactorsCoverRange)
{
    const SweepBundle b = make_preset("rectangular-all");
    double lo = 1.0, hi = 0.0;
    const SweepSpec& s = b.sweeps[0];
    for (int f = s.start_frame; f <= s.end_frame; ++f) {
        const double a = instantiate_frame(s, f).materials[0].factors.absorption_factor;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    EXPECT_DOUBLE_EQ(lo, 0.05);
    EXPECT_DOUBLE_EQ(hi, 0.95);
}

TEST(Presets, AuthoredGroundTruthInLockstep)
{
    // Ground-truth tracks interpolate the authored mapping exactly at every frame.
    const SweepBundle b = make_preset("cylinder-all");
    for (const auto& s : b.sweeps) {
        for (int f = s.start_frame; f <= s.end_frame; ++f) {
            const SceneTemplate scene = instantiate_frame(s, f);
            for (std::size_t i = 0; i < scene.materials.size(); ++i) {
                const Material& m = scene.materials[i];
                const bool tracked = std::any_of(s.tracks.begin(), s.tracks.end(), [&](const Track& t) {
                    return t.target == "material[" + std::to_string(i) + "].gt_absorption";
                });
                if (!tracked) continue;
                const auto [a, sc] = authored_gt(FactorSweep::all, m.factors);
                EXPECT_NEAR(m.gt_absorption, a, 1e-12);
                EXPECT_NEAR(m.gt_scattering, sc, 1e-12);
            }
        }
    }
}

TEST(Presets, AuthoredMappingRowOne)
{
    const auto [a, s] = authored_gt(FactorSweep::final_only, {0.05, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(a, 0.95);
    EXPECT_DOUBLE_EQ(s, 0.05);
}

TEST(Presets, ValidationFrequencies)
{
    for (const auto& [name, f] : std::map<std::string, double>{{"validation-f018", 0.18}, {"validation-f022", 0.22}}) {
        const SweepBundle b = make_preset(name);
        for (const auto& s : b.sweeps) {
            EXPECT_DOUBLE_EQ(instantiate_frame(s, s.start_frame).projector.pattern.spatial_frequency, f);
        }
    }
}

TEST(Presets, BundleJsonRoundTrip)
{
    const SweepBundle b = make_preset("rectangular-final-sct");
    const Json j = bundle_to_json(b);
    EXPECT_EQ(bundle_to_json(bundle_from_json(j)).dump(), j.dump());
}
