/*
 * Copyright 2026 The PCSA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pcsa/metrics/ssim.hpp"
#include "pcsa/tensor/volume.hpp"

namespace pcsa::verify {

/// Outcome of one named check. `max_error` is the largest observed
/// discrepancy in the check's own unit (relative or absolute).
struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string detail;
  bool passed = false;
};

/// MS-SSIM of batch item `item` by explicit loops over every window
/// position: weighted means, variances and covariance per window, the
/// luminance, contrast and structure terms kept separate, and 2x block
/// averaging between scales. Shares no code with the tape implementation;
/// only the numeric settings of `cfg` are read.
double reference_ms_ssim(const Volume<double>& x, const Volume<double>& y, std::size_t item,
                         const metrics::SSIMConfig& cfg);

struct OracleSweepOptions {
  std::size_t cases = 100;
  std::size_t min_edge = 8;
  std::size_t max_edge = 32;
  std::uint64_t seed = 11;
  double tolerance = 1e-6;
};

/// Compares metrics::ms_ssim_per_item (double tape) against
/// reference_ms_ssim on random cubic pairs with edges in [min_edge,
/// max_edge]. Pairs range from independent noise to near copies.
CheckResult ssim_oracle_sweep(const std::string& name, const metrics::SSIMConfig& cfg,
                              const OracleSweepOptions& options = {});

}  // namespace pcsa::verify
