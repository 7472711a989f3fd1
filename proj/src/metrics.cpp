#include "sfdi/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace sfdi {

namespace fs = std::filesystem;

ChannelMaps extract_channels(const Image8& image, const ChannelScaling& scaling)
{
    ChannelMaps m{image.r.cast<double>(), image.g.cast<double>()};
    if (scaling.mode == ChannelScaling::Mode::physical) {
        m.absorption *= scaling.physical_max_absorption / 255.0;
        m.scattering *= scaling.physical_max_scattering / 255.0;
    }
    return m;
}

double DiffMap::mean_valid() const
{
    const int n = valid_count();
    if (n == 0) {
        return 0.0;
    }
    return valid.select(percent, 0.0).sum() / n;
}

DiffMap pixel_diff_map(const Map2d& pred, const Map2d& ref, double floor)
{
    if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) {
        throw ContractError("pixel_diff_map: prediction and reference differ in size");
    }
    DiffMap d;
    d.valid = ref >= floor;
    d.percent = d.valid.select(100.0 * (pred - ref).abs() / ref, 0.0);
    return d;
}

Image8 diff_map_image(const DiffMap& map, double max_percent)
{
    const int w = static_cast<int>(map.percent.cols());
    const int h = static_cast<int>(map.percent.rows());
    Image8 img = Image8::zeros(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!map.valid(y, x)) continue;
            const double t = std::clamp(map.percent(y, x) / max_percent, 0.0, 1.0);
            const double r = std::clamp(2.0 * t - 1.0, 0.0, 1.0);
            const double b = std::clamp(1.0 - 2.0 * t, 0.0, 1.0);
            const double g = 1.0 - r - b;
            img.r(y, x) = quantize(r);
            img.g(y, x) = quantize(g);
            img.b(y, x) = quantize(b);
        }
    }
    return img;
}

Image8 property_half(const Image8& image)
{
    if (image.width() == 2 * image.height()) {
        return crop(image, image.height(), image.height());
    }
    return image;
}

namespace {

std::string grid_tsv(const DiffMap& d)
{
    std::string out;
    char buf[32];
    for (Eigen::Index y = 0; y < d.percent.rows(); ++y) {
        for (Eigen::Index x = 0; x < d.percent.cols(); ++x) {
            if (x > 0) out += '\t';
            if (d.valid(y, x)) {
                std::snprintf(buf, sizeof buf, "%.6g", d.percent(y, x));
                out += buf;
            } else {
                out += "nan";
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace

ImageMetrics evaluate_pair(const std::string& id, const Image8& pred_img, const Image8& ref_img,
                           const EvalOptions& options)
{
    const Image8 pred_half = property_half(pred_img);
    const Image8 ref_half = property_half(ref_img);
    if (pred_half.width() != ref_half.width() || pred_half.height() != ref_half.height()) {
        throw ContractError(id + ": prediction and reference differ in size");
    }
    ChannelMaps pred = extract_channels(pred_half, options.scaling);
    const ChannelMaps ref = extract_channels(ref_half, options.scaling);
    ImageMetrics m;
    m.id = id;
    if (options.scale_correct) {
        m.scale_absorption = fit_scale(pred.absorption, ref.absorption);
        m.scale_scattering = fit_scale(pred.scattering, ref.scattering);
        pred.absorption *= m.scale_absorption;
        pred.scattering *= m.scale_scattering;
    }
    m.nmae_absorption = nmae(pred.absorption, ref.absorption);
    m.nmae_scattering = nmae(pred.scattering, ref.scattering);

    if (options.diff_map_dir) {
        const fs::path dir = *options.diff_map_dir;
        fs::create_directories(dir);
        const std::string stem = fs::path(id).stem().string();
        const bool physical = options.scaling.mode == ChannelScaling::Mode::physical;
        const double fa = physical ? kDiffFloor * options.scaling.physical_max_absorption / 255.0 : kDiffFloor;
        const double fs_ = physical ? kDiffFloor * options.scaling.physical_max_scattering / 255.0 : kDiffFloor;
        const DiffMap da = pixel_diff_map(pred.absorption, ref.absorption, fa);
        const DiffMap ds = pixel_diff_map(pred.scattering, ref.scattering, fs_);
        write_png(dir / (stem + "_absorption_diff.png"), diff_map_image(da));
        write_png(dir / (stem + "_scattering_diff.png"), diff_map_image(ds));
        write_text_file(dir / (stem + "_absorption_diff.tsv"), grid_tsv(da));
        write_text_file(dir / (stem + "_scattering_diff.tsv"), grid_tsv(ds));
    }
    return m;
}

MetricsReport evaluate_dataset(const fs::path& pred_dir, const fs::path& ref_dir, const EvalOptions& options)
{
    auto list = [](const fs::path& dir) {
        if (!fs::is_directory(dir)) {
            throw IoError("not a directory: " + dir.string());
        }
        std::set<std::string> names;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".png") names.insert(e.path().filename().string());
        }
        return names;
    };
    const auto pred_names = list(pred_dir);
    const auto ref_names = list(ref_dir);

    MetricsReport report;
    report.scaling = options.scaling;
    report.scale_corrected = options.scale_correct;
    for (const auto& n : pred_names) {
        if (!ref_names.count(n)) report.unmatched.push_back("prediction only: " + n);
    }
    for (const auto& n : ref_names) {
        if (!pred_names.count(n)) {
            report.unmatched.push_back("reference only: " + n);
            continue;
        }
        report.per_image.push_back(evaluate_pair(n, read_png(pred_dir / n), read_png(ref_dir / n), options));
    }
    if (report.per_image.empty()) {
        std::string msg = "no matching file names between " + pred_dir.string() + " and " + ref_dir.string();
        throw ContractError(msg);
    }
    double sa = 0.0;
    double ss = 0.0;
    for (const auto& m : report.per_image) {
        sa += m.nmae_absorption;
        ss += m.nmae_scattering;
        report.envelope_absorption = std::max(report.envelope_absorption, m.nmae_absorption);
        report.envelope_scattering = std::max(report.envelope_scattering, m.nmae_scattering);
    }
    const double n = static_cast<double>(report.per_image.size());
    report.mean_absorption = sa / n;
    report.mean_scattering = ss / n;
    return report;
}

Json report_to_json(const MetricsReport& r)
{
    Json rows = Json::array();
    for (const auto& m : r.per_image) {
        Json row{{"id", m.id}, {"nmae_absorption", m.nmae_absorption}, {"nmae_scattering", m.nmae_scattering}};
        if (r.scale_corrected) {
            row["scale_absorption"] = m.scale_absorption;
            row["scale_scattering"] = m.scale_scattering;
        }
        rows.push_back(std::move(row));
    }
    return Json{{"images", r.per_image.size()},
                {"scaling", r.scaling.mode == ChannelScaling::Mode::physical ? "physical" : "proxy"},
                {"scale_corrected", r.scale_corrected},
                {"mean_nmae_absorption", r.mean_absorption},
                {"mean_nmae_scattering", r.mean_scattering},
                {"envelope_nmae_absorption", r.envelope_absorption},
                {"envelope_nmae_scattering", r.envelope_scattering},
                {"unmatched", r.unmatched},
                {"per_image", rows}};
}

std::string report_table(const MetricsReport& r)
{
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-24s %12s %12s\n", "id", "nmae_abs_%", "nmae_sct_%");
    out += buf;
    for (const auto& m : r.per_image) {
        std::snprintf(buf, sizeof buf, "%-24s %12.4f %12.4f\n", m.id.c_str(), 100.0 * m.nmae_absorption,
                      100.0 * m.nmae_scattering);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-24s %12.4f %12.4f\n%-24s %12.4f %12.4f\n", "mean", 100.0 * r.mean_absorption,
                  100.0 * r.mean_scattering, "envelope", 100.0 * r.envelope_absorption,
                  100.0 * r.envelope_scattering);
    out += buf;
    for (const auto& u : r.unmatched) out += "unmatched " + u + "\n";
    return out;
}

std::string scatter_table(const MetricsReport& r)
{
    std::string out = "nmae_abs\tnmae_sct\tid\n";
    char buf[128];
    for (const auto& m : r.per_image) {
        std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t", m.nmae_absorption, m.nmae_scattering);
        out += buf + m.id + "\n";
    }
    return out;
}

void write_report(const MetricsReport& report, const fs::path& dir)
{
    fs::create_directories(dir);
    write_text_file(dir / "report.txt", report_table(report));
    write_text_file(dir / "summary.json", report_to_json(report).dump(2) + "\n");
    write_text_file(dir / "scatter.tsv", scatter_table(report));
}

}  // namespace sfdi
