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

#include "pcsa/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "pcsa/tensor/ops.hpp"
#include "pcsa/tensor/rng.hpp"

namespace pcsa {
namespace {

double project(const Volume<double>& out, const Volume<double>& weights) {
  double acc = 0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * weights[i];
  return acc;
}

}  // namespace

GradCheckReport gradient_check(std::string name, std::span<Parameter<double>* const> targets,
                               const GraphBuilder& build, const GradCheckOptions& options) {
  GradCheckReport report;
  report.name = std::move(name);
  const CounterRng rng(options.seed);

  // Analytic pass.
  for (auto* p : targets) p->zero_grad();
  Volume<double> projection;
  {
    Tape<double> tape;
    const Var<double> out = build(tape);
    projection = Volume<double>(out.shape());
    const CounterRng prng = rng.stream("projection");
    for (std::size_t i = 0; i < projection.size(); ++i) projection[i] = prng.uniform(i, -1.0, 1.0);
    const Var<double> loss = ops::sum(ops::mul(out, tape.constant(projection)));
    tape.backward(loss);
  }

  auto loss_at = [&]() {
    Tape<double> tape;
    return project(build(tape).value(), projection);
  };

  for (std::size_t t = 0; t < targets.size(); ++t) {
    Parameter<double>& p = *targets[t];
    const std::size_t n = p.value.size();
    std::vector<std::size_t> coords;
    if (n <= options.samples_per_target) {
      coords.resize(n);
      std::iota(coords.begin(), coords.end(), 0);
    } else {
      const CounterRng crng = rng.stream(p.name).stream(t);
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t i = 0; i < options.samples_per_target; ++i) {
        const auto j = static_cast<std::size_t>(crng.uniform_int(i, static_cast<std::int64_t>(i),
                                                                 static_cast<std::int64_t>(n - 1)));
        std::swap(all[i], all[j]);
      }
      coords.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(options.samples_per_target));
    }
    for (std::size_t idx : coords) {
      const double saved = p.value[idx];
      p.value[idx] = saved + options.eps;
      const double up = loss_at();
      p.value[idx] = saved - options.eps;
      const double down = loss_at();
      p.value[idx] = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double analytic = p.grad[idx];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.abs_floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error || report.worst.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, rel);
        if (rel >= report.max_rel_error) {
          std::ostringstream os;
          os.precision(10);
          os << p.name << "[" << idx << "]: analytic=" << analytic << ", numeric=" << numeric;
          report.worst = os.str();
        }
      }
    }
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace pcsa
