#pragma once

#include "sfdi/sweep.hpp"

#include <string>
#include <vector>

namespace sfdi {

/// Which factors sweep alongside final_factor (rows of the factor-range study).
enum class FactorSweep { final_only, final_abs, final_sct, all };

/// Ground-truth proxies authored for a factor combination. With absorption and
/// scattering factors held at 1 this is (1 - final, final); swept factors are averaged in.
std::pair<double, double> authored_gt(FactorSweep kind, const FactorTriple& f);

std::vector<std::string> preset_names();

/// Throws ConfigError for unknown names. Aliases: rectangular-complex, cylinder-full.
SweepBundle make_preset(const std::string& name);

/// Reduce resolution and sample count for every sweep in the bundle.
void scale_bundle(SweepBundle& bundle, int width, int height, int samples_per_pixel);

/// Set the pattern frequency on every sweep in the bundle.
void set_bundle_frequency(SweepBundle& bundle, double frequency);

}  // namespace sfdi
