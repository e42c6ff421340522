#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmspace/convergence.hpp"
#include "mmspace/distances.hpp"
#include "mmspace/invariants.hpp"
#include "mmspace/sampling.hpp"
#include "mmspace/space.hpp"

namespace mmspace::io {

using json = nlohmann::ordered_json;
using AnySpace = std::variant<FiniteMMSpace, QMMSpace>;

/// Reads a file into JSON. Throws Error(Parse) on I/O or syntax errors.
json read_json(const std::string& path);
/// Writes with a trailing newline. Throws Error(Parse) when the file cannot be
/// written.
void write_text(const std::string& path, const std::string& text);
std::string dump(const json& value);

// Spaces: {"kind":"mm","weights":[...],"dist":[[...]]},
// {"kind":"qmm","weights":[...],"dstar":[[[[v,w],...],...],...]},
// {"kind":"graph","n":N,"edges":[[i,j],...]} (read only).
json to_json(const FiniteMMSpace& space);
json to_json(const QMMSpace& space);
AnySpace space_from_json(const json& value);
AnySpace load_space(const std::string& path);
/// Throws InvalidArgument when the file holds a qmm-space.
FiniteMMSpace load_mm_space(const std::string& path);

json to_json(const DiscreteDistribution& mu);
DiscreteDistribution distribution_from_json(const json& value);

// Targets: "interval" or {"kind":"finite","dist":[[...]]}.
json to_json(const Target& target);
Target target_from_json(const json& value);

// Measures: {"kind":"measure","carrier":"interval","atoms":[[v,w],...]} or
// {"kind":"measure","carrier":{"kind":"finite","dist":...},"weights":[...]}.
json to_json(const PushforwardMeasure& measure);
PushforwardMeasure measure_from_json(const json& value);

// Grid kernels: {"kind":"grid","weights":[...],"cells":[[...]]}, cells being
// numbers or distributions. Space files are accepted as well.
json to_json(const GridKernel& kernel);
GridKernel grid_from_json(const json& value);

json to_json(const LipschitzWitness& witness);
json to_json(const ObsDiamResult& result, double kappa);
json to_json(const SeparationResult& result, const std::vector<double>& kappas);
json to_json(const PartialDiameter& result, double kappa);
json to_json(const SampleMatrix& sample);
json to_json(const MomentSignature& signature);
json to_json(const Box1Result& result);
json to_json(const AlignResult& result);
json to_json(const ConvergenceReport& report);
json to_json(const LimitComparison& comparison);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& field);
/// Header "moment,index,label,estimate,standard_error,samples,exact", one row
/// per moment per index.
std::string to_csv(const ConvergenceReport& report);

}  // namespace mmspace::io
