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
#include <functional>
#include <span>
#include <string>

#include "pcsa/tensor/tape.hpp"

namespace pcsa {

struct GradCheckOptions {
  double eps = 1e-3;
  std::size_t samples_per_target = 20;
  std::uint64_t seed = 1;
  double tolerance = 1e-3;
  /// Denominator floor so that coordinates with (near-)zero gradient are
  /// compared in absolute terms.
  double abs_floor = 1e-6;
};

struct GradCheckReport {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "<param>[index]: analytic=..., numeric=..."
  bool passed = false;
};

/// Builds the graph under test on a fresh tape and returns its output.
using GraphBuilder = std::function<Var<double>(Tape<double>&)>;

/// Compares reverse-mode gradients against central differences
/// (f(x + eps) - f(x - eps)) / (2 eps) in double precision. The output of
/// `build` is reduced to a scalar by a fixed random projection. Every target
/// must be bound inside `build` through Tape::parameter.
GradCheckReport gradient_check(std::string name, std::span<Parameter<double>* const> targets,
                               const GraphBuilder& build, const GradCheckOptions& options = {});

}  // namespace pcsa
