#pragma once

#include "sfdi/scene.hpp"
#include "sfdi/scene_io.hpp"
#include "sfdi/transport.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sfdi {

struct Keyframe {
    int frame = 1;
    double value = 0.0;
};

/// Keyframed parameter: exact at keyframes, linear between, clamped outside.
struct Track {
    std::string target;
    std::vector<Keyframe> keyframes;

    void validate() const;
};

double evaluate_track(const Track& track, int frame);

struct GroundTruthSettings {
    bool enabled = true;
};

struct SweepSpec {
    std::string name = "sweep";
    TemplateName template_name = TemplateName::rectangular;
    ParameterSet overrides;
    int start_frame = 1;
    int end_frame = 100;
    std::vector<Track> tracks;
    RenderSettings render;
    GroundTruthSettings ground_truth;

    int frame_count() const { return end_frame - start_frame + 1; }
    void validate() const;
};

/// Recommended train/validation split recorded alongside a bundle.
struct SplitPlan {
    int train = 0;
    int val = 0;
    std::uint64_t seed = 0;
};

/// Several sweeps rendered into one dataset directory; frame ranges must not overlap.
struct SweepBundle {
    std::string name;
    std::vector<SweepSpec> sweeps;
    std::optional<SplitPlan> split;

    int frame_count() const;
    void validate() const;
};

/// Evaluated track values for one frame, in track order.
std::vector<std::pair<std::string, double>> evaluate_tracks(const SweepSpec& spec, int frame);

/// Template defaults, then overrides, then every track evaluated at frame.
/// Throws ConfigError naming any unresolvable track target.
SceneTemplate instantiate_frame(const SweepSpec& spec, int frame);

/// Per-frame render seed derived from the sweep seed.
std::uint64_t frame_seed(const SweepSpec& spec, int frame);

Json sweep_to_json(const SweepSpec& spec);
SweepSpec sweep_from_json(const Json& j);
Json bundle_to_json(const SweepBundle& bundle);
/// Accepts a single sweep object or {"bundle": name, "sweeps": [...]}.
SweepBundle bundle_from_json(const Json& j);
SweepBundle load_bundle(const std::filesystem::path& path);

std::string frame_file_name(int frame);  // frame_00001.png

struct FrameProgress {
    int frame = 0;
    bool skipped = false;
    double render_seconds = 0.0;
    double gt_seconds = 0.0;
    std::string error;
};

struct GenerateOptions {
    int workers = 0;
    std::function<void(const FrameProgress&)> on_frame;
};

struct GenerateReport {
    int rendered = 0;
    int skipped = 0;
    std::vector<std::string> failures;
    std::vector<Json> rows;  // manifest rows ordered by frame
    double seconds = 0.0;
};

inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kInputDir = "input";
inline constexpr const char* kGroundTruthDir = "gt";
inline constexpr const char* kBundleFileName = "bundle.json";

/**
 * Render lit and ground-truth images for every frame into out_dir/input and out_dir/gt
 * and maintain out_dir/manifest.jsonl; the bundle itself is saved as out_dir/bundle.json. Frames whose manifest record hash and file
 * hashes already match are skipped, so an interrupted run can be resumed.
 */
GenerateReport generate(const SweepBundle& bundle, const std::filesystem::path& out_dir,
                        const GenerateOptions& options = {});
GenerateReport generate(const SweepSpec& spec, const std::filesystem::path& out_dir,
                        const GenerateOptions& options = {});

std::vector<Json> read_manifest(const std::filesystem::path& path);

}  // namespace sfdi
