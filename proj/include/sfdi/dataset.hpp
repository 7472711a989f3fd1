#pragma once

#include "sfdi/image.hpp"
#include "sfdi/scene_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace sfdi {

/// Side-by-side composite: input in the left half, ground truth in the right.
/// Throws ContractError unless both images share dimensions.
Image8 pair(const Image8& input, const Image8& gt);
std::pair<Image8, Image8> unpair(const Image8& composite);

Image8 drop_blue(Image8 image);

struct FramePair {
    int frame = 0;
    Image8 input;
    Image8 gt;
    Json provenance = Json::object();

    /// Equal dimensions and an all-zero ground-truth blue plane.
    void validate() const;
};

struct DatasetSplit {
    std::vector<int> train;
    std::vector<int> val;
    std::uint64_t seed = 0;
};

/// Uniform permutation of ids under seed, first train_count to train, next val_count
/// to val. Both lists are returned sorted. Throws ContractError if the counts exceed ids.
DatasetSplit split(const std::vector<int>& ids, int train_count, int val_count, std::uint64_t seed);
/// Rounds val_fraction * size to the nearest count; the rest train.
DatasetSplit split(const std::vector<int>& ids, double val_fraction, std::uint64_t seed);

struct DatasetOptions {
    std::optional<int> train_count;
    std::optional<int> val_count;
    std::optional<double> val_fraction;
    std::optional<std::uint64_t> seed;
    bool drop_blue = false;
    bool swap_halves = false;  // import only: source composites carry ground truth on the left
};

struct DatasetReport {
    DatasetSplit split;
    int width = 0;   // composite width
    int height = 0;
    std::vector<Json> rows;
};

inline constexpr const char* kDatasetManifestName = "dataset.jsonl";
inline constexpr const char* kTrainDir = "train";
inline constexpr const char* kValDir = "val";
inline constexpr std::uint64_t kDefaultSplitSeed = 2022;

/**
 * Pair every manifest frame of a generated sweep directory and write composites to
 * out_dir/train and out_dir/val with dataset.jsonl. Without explicit counts or a
 * fraction, the split plan recorded in bundle.json is used, else a 0.3 fraction.
 */
DatasetReport build_dataset(const std::filesystem::path& sweep_dir, const std::filesystem::path& out_dir,
                            const DatasetOptions& options = {});

/// Re-split externally supplied composite PNGs (e.g. experimental data) into the same layout.
DatasetReport import_composites(const std::filesystem::path& src_dir, const std::filesystem::path& out_dir,
                                const DatasetOptions& options = {});

/// Frame id encoded in a frame_XXXXX.png name, if any.
std::optional<int> frame_id_from_name(const std::string& file_name);

}  // namespace sfdi
