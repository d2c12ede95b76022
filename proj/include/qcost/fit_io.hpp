#pragma once

#include <filesystem>

#include "qcost/design.hpp"
#include "qcost/estimator.hpp"

namespace qcost {

// JSON fit artifact: coefficient vectors, fixed effects keyed by bank id,
// residuals and fitted scale keyed by (bank id, year), innovation quantiles,
// convergence metadata and the normalizations in force. Downstream commands
// reload it against a rebuilt design without re-estimating.
void write_model_fit(const std::filesystem::path& path, const ModelFit& fit,
                     const TranslogDesign& design);

ModelFit read_model_fit(const std::filesystem::path& path,
                        const TranslogDesign& design);

}  // namespace qcost
