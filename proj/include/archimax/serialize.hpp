#pragma once

#include <string>

#include "json.hpp"

#include "archimax/nn.hpp"
#include "archimax/parametric.hpp"
#include "archimax/pipeline.hpp"
#include "archimax/radial_infer.hpp"
#include "archimax/sampler.hpp"
#include "archimax/stdf_infer.hpp"

namespace archimax {

using Json = nlohmann::json;

/// Networks store weights, running statistics and pools as decimal strings
/// in shortest round-trip form, so reading back is value-exact.
Json to_json(const nn::GenerativeNet& net);
nn::GenerativeNet net_from_json(const Json& j);

Json to_json(const SpectralModel& model);
SpectralModel spectral_from_json(const Json& j);

Json to_json(const RadialModel& model);
RadialModel radial_from_json(const Json& j);

Json to_json(const FiniteRadial& radial);
FiniteRadial finite_radial_from_json(const Json& j);

Json to_json(const ArchGenerator& g);
ArchGenerator arch_generator_from_json(const Json& j);

Json to_json(const NsdParams& p);
NsdParams nsd_from_json(const Json& j);

Json to_json(const ArchimaxModel& model);
ArchimaxModel model_from_json(const Json& j);

Json to_json(const SynthSpec& spec);

/// One JSON object per stage, then a summary object.
std::vector<Json> diagnostics_lines(const FitDiagnostics& diag);

/// Applies the fields present in `j` on top of `base`.
FitConfig fit_config_from_json(const Json& j, FitConfig base = {});

Json read_json_file(const std::string& path);

}  // namespace archimax
