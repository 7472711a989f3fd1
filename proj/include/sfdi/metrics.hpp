#pragma once

#include "sfdi/image.hpp"
#include "sfdi/scene_io.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sfdi {

struct ChannelScaling {
    enum class Mode { proxy, physical };
    Mode mode = Mode::proxy;
    double physical_max_absorption = 0.25;  // mm^-1 at pixel value 255
    double physical_max_scattering = 2.5;

    static ChannelScaling proxy() { return {}; }
    static ChannelScaling physical() { return {Mode::physical}; }
};

struct ChannelMaps {
    Map2d absorption;
    Map2d scattering;
};

/// Red plane to absorption, green plane to scattering; blue is ignored.
ChannelMaps extract_channels(const Image8& image, const ChannelScaling& scaling = {});

/// Sum |pred - ref| / sum ref. Throws ContractError on size mismatch or an all-zero reference.
template <typename A, typename B>
double nmae(const Eigen::ArrayBase<A>& pred, const Eigen::ArrayBase<B>& ref)
{
    if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) {
        throw ContractError("nmae: prediction and reference differ in size");
    }
    const auto r = ref.template cast<double>();
    const double denom = r.sum();
    if (!(denom > 0.0)) {
        throw ContractError("nmae: reference sums to zero, metric undefined");
    }
    return (pred.template cast<double>() - r).abs().sum() / denom;
}

/// argmin_s sum (s*pred - ref)^2. Throws ContractError on an all-zero prediction.
template <typename A, typename B>
double fit_scale(const Eigen::ArrayBase<A>& pred, const Eigen::ArrayBase<B>& ref)
{
    if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) {
        throw ContractError("fit_scale: prediction and reference differ in size");
    }
    const auto p = pred.template cast<double>();
    const double pp = p.square().sum();
    if (!(pp > 0.0)) {
        throw ContractError("fit_scale: prediction is all zero");
    }
    return (p * ref.template cast<double>()).sum() / pp;
}

struct DiffMap {
    Map2d percent;          // 100 |pred - ref| / ref where valid, 0 elsewhere
    Plane<bool> valid;      // false where ref < floor

    int valid_count() const { return static_cast<int>(valid.count()); }
    double mean_valid() const;
};

inline constexpr double kDiffFloor = 1.0 / 255.0;

DiffMap pixel_diff_map(const Map2d& pred, const Map2d& ref, double floor = kDiffFloor);

/// False-colour rendering, 0% blue through 50% green to >= max_percent red; invalid pixels black.
Image8 diff_map_image(const DiffMap& map, double max_percent = 100.0);

struct ImageMetrics {
    std::string id;
    double nmae_absorption = 0.0;
    double nmae_scattering = 0.0;
    double scale_absorption = 1.0;
    double scale_scattering = 1.0;
};

struct MetricsReport {
    std::vector<ImageMetrics> per_image;  // sorted by id
    double mean_absorption = 0.0;
    double mean_scattering = 0.0;
    double envelope_absorption = 0.0;  // maximum over images
    double envelope_scattering = 0.0;
    std::vector<std::string> unmatched;  // files present on only one side
    ChannelScaling scaling;
    bool scale_corrected = false;
};

struct EvalOptions {
    ChannelScaling scaling;
    bool scale_correct = false;
    std::optional<std::filesystem::path> diff_map_dir;
};

/// Ground-truth half of an image: the right half of a 2:1 composite, else the image itself.
Image8 property_half(const Image8& image);

ImageMetrics evaluate_pair(const std::string& id, const Image8& pred, const Image8& ref, const EvalOptions& options);

/// Matches PNG files by name. Throws ContractError when no names match.
MetricsReport evaluate_dataset(const std::filesystem::path& pred_dir, const std::filesystem::path& ref_dir,
                               const EvalOptions& options = {});

Json report_to_json(const MetricsReport& report);
std::string report_table(const MetricsReport& report);
std::string scatter_table(const MetricsReport& report);  // nmae_abs, nmae_sct, id

/// report.txt, summary.json and scatter.tsv under dir.
void write_report(const MetricsReport& report, const std::filesystem::path& dir);

}  // namespace sfdi
