#pragma once

#include "rfspec/validation.hpp"

namespace rfspec::fixtures {

inline ModelParams random_params(std::mt19937_64 &rng) { return random_valid_params(rng); }

inline std::vector<ModelParams> figure_sets() { return rfspec::figure_sets(); }

} // namespace rfspec::fixtures
