#include "sfdi/dataset.hpp"

#include "sfdi/rng.hpp"
#include "sfdi/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

namespace sfdi {

namespace fs = std::filesystem;

Image8 pair(const Image8& input, const Image8& gt)
{
    if (input.width() != gt.width() || input.height() != gt.height()) {
        throw ContractError("pair: input is " + std::to_string(input.width()) + "x" +
                            std::to_string(input.height()) + " but ground truth is " +
                            std::to_string(gt.width()) + "x" + std::to_string(gt.height()));
    }
    const int w = input.width();
    Image8 out = Image8::zeros(2 * w, input.height());
    out.r.leftCols(w) = input.r;
    out.g.leftCols(w) = input.g;
    out.b.leftCols(w) = input.b;
    out.r.rightCols(w) = gt.r;
    out.g.rightCols(w) = gt.g;
    out.b.rightCols(w) = gt.b;
    return out;
}

std::pair<Image8, Image8> unpair(const Image8& composite)
{
    if (composite.width() % 2 != 0) {
        throw ContractError("unpair: composite width must be even");
    }
    const int w = composite.width() / 2;
    return {crop(composite, 0, w), crop(composite, w, w)};
}

Image8 drop_blue(Image8 image)
{
    image.b.setZero();
    return image;
}

void FramePair::validate() const
{
    if (input.width() != gt.width() || input.height() != gt.height()) {
        throw ContractError("frame " + std::to_string(frame) + ": input and ground truth differ in size");
    }
    if ((gt.b != 0).any()) {
        throw ContractError("frame " + std::to_string(frame) + ": ground-truth blue plane is not zero");
    }
}

DatasetSplit split(const std::vector<int>& ids, int train_count, int val_count, std::uint64_t seed)
{
    if (train_count < 0 || val_count < 0 ||
        static_cast<std::size_t>(train_count) + static_cast<std::size_t>(val_count) > ids.size()) {
        throw ContractError("split: requested " + std::to_string(train_count) + "+" + std::to_string(val_count) +
                            " items from " + std::to_string(ids.size()));
    }
    std::vector<int> order = ids;
    std::sort(order.begin(), order.end());
    CounterRng rng(seed, 0, 0);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    DatasetSplit s;
    s.seed = seed;
    s.train.assign(order.begin(), order.begin() + train_count);
    s.val.assign(order.begin() + train_count, order.begin() + train_count + val_count);
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    return s;
}

DatasetSplit split(const std::vector<int>& ids, double val_fraction, std::uint64_t seed)
{
    if (!(val_fraction >= 0.0 && val_fraction <= 1.0)) {
        throw ContractError("split: val_fraction must lie in [0,1]");
    }
    const int n = static_cast<int>(ids.size());
    const int val = static_cast<int>(std::lround(val_fraction * n));
    return split(ids, n - val, val, seed);
}

std::optional<int> frame_id_from_name(const std::string& file_name)
{
    static const std::regex re(R"(frame_(\d+)\.png)");
    std::smatch m;
    if (std::regex_match(file_name, m, re)) {
        return std::stoi(m[1].str());
    }
    return std::nullopt;
}

namespace {

struct Source {
    int id = 0;
    fs::path composite;  // import only
    fs::path input;
    fs::path gt;
    Json provenance = Json::object();
};

DatasetSplit resolve_split(const std::vector<int>& ids, const DatasetOptions& o, const std::optional<SplitPlan>& plan)
{
    if (o.train_count || o.val_count) {
        const int n = static_cast<int>(ids.size());
        const int train = o.train_count.value_or(n - o.val_count.value_or(0));
        const int val = o.val_count.value_or(n - train);
        return split(ids, train, val, o.seed.value_or(plan ? plan->seed : kDefaultSplitSeed));
    }
    if (o.val_fraction) {
        return split(ids, *o.val_fraction, o.seed.value_or(plan ? plan->seed : kDefaultSplitSeed));
    }
    if (plan && plan->train + plan->val == static_cast<int>(ids.size())) {
        return split(ids, plan->train, plan->val, o.seed.value_or(plan->seed));
    }
    return split(ids, 0.3, o.seed.value_or(kDefaultSplitSeed));
}

DatasetReport write_dataset(std::vector<Source>& sources, const fs::path& out_dir, const DatasetOptions& o,
                            const std::optional<SplitPlan>& plan, const std::string& origin)
{
    if (sources.empty()) {
        throw ContractError("no frames found to build a dataset from");
    }
    std::sort(sources.begin(), sources.end(), [](const Source& a, const Source& b) { return a.id < b.id; });
    std::vector<int> ids;
    for (const auto& s : sources) ids.push_back(s.id);
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw ContractError("duplicate frame ids in dataset source");
    }

    DatasetReport report;
    report.split = resolve_split(ids, o, plan);
    fs::create_directories(out_dir / kTrainDir);
    fs::create_directories(out_dir / kValDir);

    std::vector<Json> rows;
    for (const auto& src : sources) {
        const char* dir = nullptr;
        if (std::binary_search(report.split.train.begin(), report.split.train.end(), src.id)) {
            dir = kTrainDir;
        } else if (std::binary_search(report.split.val.begin(), report.split.val.end(), src.id)) {
            dir = kValDir;
        } else {
            continue;
        }
        Image8 composite;
        if (!src.composite.empty()) {
            composite = read_png(src.composite);
            if (o.swap_halves) {
                auto [left, right] = unpair(composite);
                composite = pair(right, left);
            }
            unpair(composite);
        } else {
            FramePair fp{src.id, read_png(src.input), read_png(src.gt), src.provenance};
            fp.validate();
            composite = pair(fp.input, fp.gt);
        }
        if (o.drop_blue) {
            composite = drop_blue(std::move(composite));
        }
        if (report.width == 0) {
            report.width = composite.width();
            report.height = composite.height();
        } else if (report.width != composite.width() || report.height != composite.height()) {
            throw ContractError("frame " + std::to_string(src.id) + " differs in size from earlier frames");
        }
        const fs::path rel = fs::path(dir) / frame_file_name(src.id);
        write_png(out_dir / rel, composite);
        Json row;
        row["id"] = src.id;
        row["split"] = dir;
        row["file"] = rel.string();
        row["hash"] = hex64(hash_file(out_dir / rel));
        row["provenance"] = src.provenance;
        rows.push_back(std::move(row));
    }

    Json header;
    header["dataset"] = origin;
    header["layout"] = Json{{"left", "input"}, {"right", "ground_truth"}};
    header["composite_width"] = report.width;
    header["composite_height"] = report.height;
    header["split_seed"] = report.split.seed;
    header["train"] = report.split.train.size();
    header["val"] = report.split.val.size();
    header["drop_blue"] = o.drop_blue;
    std::string text = header.dump() + "\n";
    for (const auto& r : rows) text += r.dump() + "\n";
    write_text_file(out_dir / kDatasetManifestName, text);
    report.rows = std::move(rows);
    return report;
}

}  // namespace

DatasetReport build_dataset(const fs::path& sweep_dir, const fs::path& out_dir, const DatasetOptions& options)
{
    const fs::path manifest = sweep_dir / kManifestName;
    if (!fs::exists(manifest)) {
        throw IoError("no " + std::string(kManifestName) + " in " + sweep_dir.string());
    }
    std::vector<Source> sources;
    for (const auto& row : read_manifest(manifest)) {
        if (!row.contains("gt") || row.at("gt").is_null()) {
            throw ContractError("frame " + std::to_string(row.value("frame", 0)) + " has no ground truth");
        }
        Source s;
        s.id = row.at("frame").get<int>();
        s.input = sweep_dir / row.at("input").get<std::string>();
        s.gt = sweep_dir / row.at("gt").get<std::string>();
        s.provenance = Json{{"sweep", row.value("sweep", "")},
                            {"template", row.value("template", "")},
                            {"params", row.value("params", Json::object())},
                            {"seed", row.value("seed", std::uint64_t{0})}};
        sources.push_back(std::move(s));
    }
    std::optional<SplitPlan> plan;
    std::string origin = sweep_dir.filename().string();
    if (fs::exists(sweep_dir / kBundleFileName)) {
        const SweepBundle b = load_bundle(sweep_dir / kBundleFileName);
        plan = b.split;
        origin = b.name;
    }
    return write_dataset(sources, out_dir, options, plan, origin);
}

DatasetReport import_composites(const fs::path& src_dir, const fs::path& out_dir, const DatasetOptions& options)
{
    if (!fs::is_directory(src_dir)) {
        throw IoError("not a directory: " + src_dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(src_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Source> sources;
    int next = 1;
    for (const auto& f : files) {
        Source s;
        s.id = frame_id_from_name(f.filename().string()).value_or(next);
        next = s.id + 1;
        s.composite = f;
        s.provenance = Json{{"imported_from", f.filename().string()}};
        sources.push_back(std::move(s));
    }
    return write_dataset(sources, out_dir, options, std::nullopt, src_dir.filename().string());
}

}  // namespace sfdi
