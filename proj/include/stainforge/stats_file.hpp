// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#pragma once

#include <stainforge/pipeline.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace stainforge {

inline constexpr int kStatsFileVersion = 1;

/// Statistics file: one YAML document per fitted color space, in the order
/// lab, hsv, hed.
///
///   version: 1
///   color_space: lab
///   family: gaussian          # gaussian | t | uniform | laplace
///   dof: 5                    # present only for family t
///   n_samples: 80
///   avg: { mean: [f, f, f], std: [f, f, f] }   # M_A and sqrt(diag Sigma_A)
///   std: { mean: [f, f, f], std: [f, f, f] }   # M_D and sqrt(diag Sigma_D)
///   lab_variant: cie-d65
///   hed_matrix: ruifrok-johnston
///
/// Floats carry 9 significant digits. Unknown keys are rejected and a version
/// other than 1 raises VersionMismatch.
std::string serialize_stats(const StatsSet& stats);
StatsSet parse_stats(std::string_view text);

StatsSet load_stats(const std::filesystem::path& path);
void save_stats(const StatsSet& stats, const std::filesystem::path& path);

} // namespace stainforge
