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

#include <cstdint>
#include <string>
#include <vector>

#include "pcsa/verify/oracle.hpp"

namespace pcsa::verify {

struct GradientSuiteOptions {
  double tolerance = 1e-3;
  std::size_t samples_per_target = 20;
  std::uint64_t seed = 5;
  /// Restrict to checks whose name contains this substring; empty runs all.
  std::string filter;
};

/// Names of every check in the suite, in run order.
std::vector<std::string> gradient_check_names();

/// Central finite-difference checks in double precision for every
/// differentiable op, the attention and network blocks, the losses and a
/// reduced end-to-end generator. One result per check.
std::vector<CheckResult> run_gradient_suite(const GradientSuiteOptions& options = {});

}  // namespace pcsa::verify
