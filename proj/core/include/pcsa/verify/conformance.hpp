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
#include <vector>

#include "pcsa/verify/oracle.hpp"

namespace pcsa::verify {

struct ConformanceOptions {
  /// Cubic edges the default generator must map to themselves.
  std::vector<std::size_t> generator_edges = {16, 24, 32, 64};
  std::uint64_t seed = 3;
};

/// Architecture and identity checks on the default configuration: generator
/// shape preservation and output range per edge, PCCA block channel counts,
/// discriminator layer widths and logit shape, and ms_ssim(x, x) == 1.
std::vector<CheckResult> run_conformance_checks(const ConformanceOptions& options = {});

}  // namespace pcsa::verify
