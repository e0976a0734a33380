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


#include "pcsa/verify/conformance.hpp"

#include <sstream>

#include "pcsa/net/blocks.hpp"
#include "pcsa/net/generator.hpp"
#include "pcsa/tensor/rng.hpp"

namespace pcsa::verify {
namespace {

Volume<float> noise(const Shape& s, std::uint64_t seed) {
  Volume<float> v(s);
  const CounterRng r(seed);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(r.uniform(i));
  return v;
}

CheckResult exact(std::string name, bool ok, std::string detail) {
  CheckResult r;
  r.name = std::move(name);
  r.max_error = ok ? 0.0 : 1.0;
  r.passed = ok;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

std::vector<CheckResult> run_conformance_checks(const ConformanceOptions& options) {
  std::vector<CheckResult> out;
  const net::GeneratorConfig gcfg;

  {
    const net::Generator<float> g(gcfg, options.seed);
    for (std::size_t edge : options.generator_edges) {
      const Shape s = cube(1, edge);
      Tape<float> tape;
      const Volume<float>& y = g.forward(tape.constant(noise(s, edge)), false).value();
      bool in_range = true;
      for (float v : y.data()) in_range = in_range && v > 0.0f && v < 1.0f;
      out.push_back(exact("generator_shape_" + std::to_string(edge), y.shape() == s && in_range,
                          s.str() + " -> " + y.shape().str() + (in_range ? "" : ", values outside (0,1)")));
    }
  }

  {
    ParameterStore<float> store(options.seed);
    const auto p1 = net::PyramidParams<float>::create(store, "pcca1", 1, gcfg.pcca[0], true,
                                                      gcfg.ca_reduction, true);
    const auto p2 = net::PyramidParams<float>::create(store, "pcca2", p1.out_channels, gcfg.pcca[1],
                                                      true, gcfg.ca_reduction, true);
    Tape<float> tape;
    const Var<float> e1 = net::pcca_block(tape.constant(noise(cube(1, 8), 1)), p1, false);
    const Var<float> e2 = net::pcca_block(e1, p2, false);
    out.push_back(exact("pcca1_channels", e1.shape() == cube(24, 4), "emits " + e1.shape().str()));
    out.push_back(exact("pcca2_channels", e2.shape() == cube(96, 2), "emits " + e2.shape().str()));
  }

  {
    const net::DiscriminatorConfig dcfg;
    const net::Discriminator<float> d(dcfg, options.seed);
    std::ostringstream widths;
    bool ok = true;
    const std::array<std::size_t, 4> want = {24, 48, 96, 192};
    for (std::size_t l = 0; l < 4; ++l) {
      const auto* w = d.params().find("discriminator.layer" + std::to_string(l + 1) + ".conv.weight");
      const std::size_t got = w ? w->value.shape().batch : 0;
      widths << (l ? "," : "") << got;
      ok = ok && got == want[l];
    }
    Tape<float> tape;
    const Var<float> logits = d.forward(tape.constant(noise(cube(1, 16, 2), 2)), false);
    ok = ok && logits.shape() == Shape{2, 1, 1, 1, 1};
    out.push_back(exact("discriminator_ladder", ok,
                        "widths (" + widths.str() + "), logits " + logits.shape().str()));
  }

  {
    const auto cfg = metrics::SSIMConfig::multi_scale();
    double worst = 0.0;
    for (std::size_t edge : {8, 16, 24}) {
      const Volume<double> x = noise(cube(1, edge, 2), 40 + edge).cast<double>();
      Tape<double> tape;
      const Var<double> v = metrics::ms_ssim_per_item(tape.constant(x), tape.constant(x), cfg);
      for (double s : v.value().data()) worst = std::max(worst, std::abs(s - 1.0));
    }
    CheckResult r = exact("ms_ssim_identity", worst == 0.0, "max |ms_ssim(x,x) - 1| over 3 edges");
    r.max_error = worst;
    out.push_back(r);
  }
  return out;
}

}  // namespace pcsa::verify
