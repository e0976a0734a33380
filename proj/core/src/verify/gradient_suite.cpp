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


#include "pcsa/verify/gradient_suite.hpp"

#include <functional>
#include <sstream>

#include "pcsa/attention/attention.hpp"
#include "pcsa/metrics/losses.hpp"
#include "pcsa/net/blocks.hpp"
#include "pcsa/net/generator.hpp"
#include "pcsa/tensor/gradcheck.hpp"
#include "pcsa/tensor/ops.hpp"
#include "pcsa/tensor/rng.hpp"

namespace pcsa::verify {
namespace {

using namespace pcsa::ops;
using P = Parameter<double>;
using Targets = std::vector<P*>;

struct Ctx {
  const GradientSuiteOptions& options;
  CounterRng rng;

  P param(const std::string& name, const Shape& s, double lo = -1.0, double hi = 1.0) const {
    Volume<double> v(s);
    const CounterRng r = rng.stream(name);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = r.uniform(i, lo, hi);
    return P(name, std::move(v));
  }

  // Moves every stored parameter off its initial value so zero biases and
  // zero gates take part in the check.
  void jitter(ParameterStore<double>& store, double amount = 0.1) const {
    for (auto& p : store) {
      const CounterRng r = rng.stream("jitter").stream(p.name);
      for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] += r.uniform(i, -amount, amount);
    }
  }

  // 1e-5 keeps roundoff small for smooth graphs; graphs with many ReLU or
  // max-pool kinks use 1e-6 so perturbations rarely cross one.
  GradCheckOptions grad_options(double eps = 1e-5) const {
    GradCheckOptions o;
    o.eps = eps;
    o.samples_per_target = options.samples_per_target;
    o.seed = options.seed;
    o.tolerance = options.tolerance;
    return o;
  }
};

CheckResult finish(const GradCheckReport& r, double tolerance) {
  CheckResult out;
  out.name = r.name;
  out.max_error = r.max_rel_error;
  out.tolerance = tolerance;
  out.passed = r.passed;
  std::ostringstream os;
  os << r.coordinates << " coords; worst " << r.worst;
  out.detail = os.str();
  return out;
}

Targets all_of(ParameterStore<double>& store) {
  Targets t;
  for (auto& p : store) t.push_back(&p);
  return t;
}

using Check = std::function<CheckResult(const Ctx&, const std::string&)>;

// Builds a check for a unary op applied to one random input.
Check unary_check(Shape s, double lo, double hi, std::function<Var<double>(const Var<double>&)> op) {
  return [=](const Ctx& c, const std::string& name) {
    P x = c.param(name + ".x", s, lo, hi);
    Targets t{&x};
    return finish(gradient_check(name, t, [&](Tape<double>& tape) { return op(tape.parameter(x)); },
                                 c.grad_options()),
                  c.options.tolerance);
  };
}

Check conv_check(Shape xs, std::size_t out, std::size_t k, ConvOptions opt) {
  return [=](const Ctx& c, const std::string& name) {
    P x = c.param(name + ".x", xs);
    P w = c.param(name + ".w", Shape{out, xs.channels, k, k, k});
    P b = c.param(name + ".b", Shape{1, out, 1, 1, 1});
    Targets t{&x, &w, &b};
    return finish(gradient_check(name, t,
                                 [&](Tape<double>& tape) {
                                   return conv3d(tape.parameter(x), tape.parameter(w),
                                                 tape.parameter(b), opt);
                                 },
                                 c.grad_options()),
                  c.options.tolerance);
  };
}

Check binary_check(std::function<Var<double>(const Var<double>&, const Var<double>&)> op) {
  return [=](const Ctx& c, const std::string& name) {
    P a = c.param(name + ".a", Shape{2, 3, 2, 3, 2});
    P b = c.param(name + ".b", Shape{1, 3, 1, 1, 1}, 0.5, 1.5);
    Targets t{&a, &b};
    return finish(gradient_check(name, t,
                                 [&](Tape<double>& tape) {
                                   return op(tape.parameter(a), tape.parameter(b));
                                 },
                                 c.grad_options()),
                  c.options.tolerance);
  };
}

net::GeneratorConfig reduced_generator() {
  net::GeneratorConfig g;
  g.pcca = {net::PyramidSpec{{{5, 2}, {3, 3}}, 1}, net::PyramidSpec{{{3, 4}, {1, 2}}, 1}};
  g.deep_stage = net::PyramidSpec{{{3, 6}}, 2};
  g.ca_reduction = 2;
  g.head_channels = 2;
  return g;
}

const std::vector<std::pair<std::string, Check>>& checks() {
  static const std::vector<std::pair<std::string, Check>> table = {
      {"conv3d_same_stride1", conv_check(Shape{2, 2, 5, 4, 5}, 3, 3, {})},
      {"conv3d_same_stride2", conv_check(Shape{1, 2, 6, 5, 6}, 2, 3, {.stride = 2})},
      {"conv3d_valid", conv_check(Shape{1, 2, 5, 5, 5}, 2, 3, {.padding = Padding::kValid})},
      {"conv3d_kernel5", conv_check(Shape{1, 1, 6, 6, 6}, 2, 5, {})},
      {"conv3d_pointwise", conv_check(Shape{2, 3, 3, 3, 3}, 2, 1, {})},
      {"transposed_conv3d",
       [](const Ctx& c, const std::string& name) {
         P x = c.param(name + ".x", Shape{2, 2, 3, 2, 3});
         P w = c.param(name + ".w", Shape{2, 3, 3, 3, 3});
         P b = c.param(name + ".b", Shape{1, 3, 1, 1, 1});
         Targets t{&x, &w, &b};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return transposed_conv3d(tape.parameter(x), tape.parameter(w),
                                                                 tape.parameter(b));
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"fully_connected",
       [](const Ctx& c, const std::string& name) {
         P x = c.param(name + ".x", Shape{3, 2, 2, 1, 2});
         P w = c.param(name + ".w", Shape{4, 8, 1, 1, 1});
         P b = c.param(name + ".b", Shape{1, 4, 1, 1, 1});
         Targets t{&x, &w, &b};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return fully_connected(tape.parameter(x), tape.parameter(w),
                                                               tape.parameter(b));
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"max_pool3d", unary_check(Shape{2, 2, 4, 4, 6}, -1, 1, [](auto& x) { return max_pool3d(x); })},
      {"avg_pool3d", unary_check(Shape{1, 2, 5, 4, 6}, -1, 1, [](auto& x) { return avg_pool3d(x, 2); })},
      {"global_avg_pool", unary_check(Shape{2, 3, 3, 2, 3}, -1, 1, [](auto& x) { return global_avg_pool(x); })},
      {"global_max_pool", unary_check(Shape{2, 3, 3, 2, 3}, -1, 1, [](auto& x) { return global_max_pool(x); })},
      {"trilinear_upsample",
       unary_check(Shape{1, 2, 3, 2, 3}, -1, 1, [](auto& x) { return trilinear_upsample(x); })},
      {"nearest_upsample",
       unary_check(Shape{1, 2, 2, 3, 2}, -1, 1, [](auto& x) { return nearest_upsample(x, 2); })},
      {"window_filter", unary_check(Shape{2, 1, 6, 5, 7}, -1, 1,
                                    [](auto& x) { return window_filter(x, std::vector<double>{0.2, 0.5, 0.3}); })},
      {"relu", unary_check(Shape{1, 2, 3, 3, 3}, -1, 1, [](auto& x) { return relu(x); })},
      {"sigmoid", unary_check(Shape{1, 2, 3, 3, 3}, -4, 4, [](auto& x) { return sigmoid(x); })},
      {"softplus", unary_check(Shape{1, 2, 3, 3, 3}, -4, 4, [](auto& x) { return softplus(x); })},
      {"softmax_channels",
       unary_check(Shape{2, 4, 2, 3, 2}, -3, 3, [](auto& x) { return softmax_channels(x); })},
      {"abs", unary_check(Shape{1, 2, 3, 3, 3}, -1, 1, [](auto& x) { return ops::abs(x); })},
      {"square", unary_check(Shape{1, 2, 3, 3, 3}, -1, 1, [](auto& x) { return square(x); })},
      {"pospow", unary_check(Shape{1, 2, 3, 3, 3}, 0.1, 1.5, [](auto& x) { return pospow(x, 0.2856); })},
      {"sqrt_pos", unary_check(Shape{1, 2, 3, 3, 3}, 0.1, 2.0, [](auto& x) { return sqrt_pos(x); })},
      {"scale_shift", unary_check(Shape{1, 2, 3, 3, 3}, -1, 1,
                                  [](auto& x) { return add_scalar(scale(x, -1.7), 0.3); })},
      {"reductions", unary_check(Shape{3, 2, 2, 3, 2}, -1, 1,
                                 [](auto& x) {
                                   return add(scale(sum(x), 0.1), add(mean(x), sum(item_mean(square(x)))));
                                 })},
      {"add_broadcast", binary_check([](auto& a, auto& b) { return add(a, b); })},
      {"sub_broadcast", binary_check([](auto& a, auto& b) { return sub(b, a); })},
      {"mul_broadcast", binary_check([](auto& a, auto& b) { return mul(a, b); })},
      {"div_broadcast", binary_check([](auto& a, auto& b) { return div(a, b); })},
      {"concat_slice_channels",
       [](const Ctx& c, const std::string& name) {
         P a = c.param(name + ".a", Shape{2, 2, 2, 2, 3});
         P b = c.param(name + ".b", Shape{2, 3, 2, 2, 3});
         Targets t{&a, &b};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        const std::vector<Var<double>> parts = {tape.parameter(a),
                                                                                tape.parameter(b)};
                                        const Var<double> cat = concat_channels<double>(parts);
                                        return mul(cat, slice_channels(square(cat), 1, 1));
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"token_attention",
       [](const Ctx& c, const std::string& name) {
         P q = c.param(name + ".q", Shape{2, 3, 2, 2, 2});
         P k = c.param(name + ".k", Shape{2, 3, 2, 2, 2});
         P v = c.param(name + ".v", Shape{2, 3, 2, 2, 2});
         Targets t{&q, &k, &v};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return token_attention(tape.parameter(q), tape.parameter(k),
                                                               tape.parameter(v));
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"channel_attention",
       [](const Ctx& c, const std::string& name) {
         ParameterStore<double> store(c.options.seed);
         const auto ca = attention::ChannelAttentionParams<double>::create(store, "ca", 6, 2);
         c.jitter(store);
         P x = c.param(name + ".x", Shape{2, 6, 3, 2, 3});
         Targets t = all_of(store);
         t.push_back(&x);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return attention::channel_attention(tape.parameter(x), ca);
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"grouped_attention_weighting",
       [](const Ctx& c, const std::string& name) {
         ParameterStore<double> store(c.options.seed);
         const std::vector<attention::ChannelAttentionParams<double>> ca = {
             attention::ChannelAttentionParams<double>::create(store, "ca0", 2, 2),
             attention::ChannelAttentionParams<double>::create(store, "ca1", 3, 2)};
         c.jitter(store);
         P a = c.param(name + ".a", Shape{2, 2, 2, 3, 2});
         P b = c.param(name + ".b", Shape{2, 3, 2, 3, 2});
         Targets t = all_of(store);
         t.push_back(&a);
         t.push_back(&b);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        const std::vector<Var<double>> groups = {tape.parameter(a),
                                                                                 tape.parameter(b)};
                                        return attention::grouped_attention_weighting<double>(groups, ca);
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"self_attention_patch1",
       [](const Ctx& c, const std::string& name) {
         ParameterStore<double> store(c.options.seed);
         auto sa = attention::SelfAttentionParams<double>::create(store, "sa", 3, 1);
         c.jitter(store);
         sa.gamma->value[0] = 0.6;
         P x = c.param(name + ".x", Shape{2, 3, 2, 3, 2});
         Targets t = all_of(store);
         t.push_back(&x);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return attention::self_attention(tape.parameter(x), sa);
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"self_attention_patch2",
       [](const Ctx& c, const std::string& name) {
         ParameterStore<double> store(c.options.seed);
         auto sa = attention::SelfAttentionParams<double>::create(store, "sa", 2, 2);
         c.jitter(store);
         sa.gamma->value[0] = -0.8;
         P x = c.param(name + ".x", Shape{1, 2, 4, 4, 2});
         Targets t = all_of(store);
         t.push_back(&x);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return attention::self_attention(tape.parameter(x), sa);
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"residual_block",
       [](const Ctx& c, const std::string& name) {
         ParameterStore<double> store(c.options.seed);
         const auto res = net::ResidualParams<double>::create(store, "res", 2);
         c.jitter(store);
         P x = c.param(name + ".x", Shape{1, 2, 4, 3, 4});
         Targets t = all_of(store);
         t.push_back(&x);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return net::residual_block(tape.parameter(x), res);
                                      },
                                      c.grad_options(1e-6)),
                       c.options.tolerance);
       }},
      {"pcca_block",
       [](const Ctx& c, const std::string& name) {
         ParameterStore<double> store(c.options.seed);
         const auto pcca = net::PyramidParams<double>::create(
             store, "pcca", 2, net::PyramidSpec{{{5, 2}, {3, 3}, {1, 2}}, 1}, true, 2, true);
         c.jitter(store);
         P x = c.param(name + ".x", Shape{2, 2, 4, 4, 4});
         Targets t = all_of(store);
         t.push_back(&x);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return net::pcca_block(tape.parameter(x), pcca);
                                      },
                                      c.grad_options(1e-6)),
                       c.options.tolerance);
       }},
      {"l1_loss",
       [](const Ctx& c, const std::string& name) {
         P x = c.param(name + ".x", Shape{2, 1, 4, 4, 4});
         P y = c.param(name + ".y", Shape{2, 1, 4, 4, 4});
         Targets t{&x, &y};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return metrics::l1_loss(tape.parameter(x), tape.parameter(y));
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"ssim_loss_single_scale",
       [](const Ctx& c, const std::string& name) {
         P x = c.param(name + ".x", Shape{2, 1, 7, 7, 7}, 0.0, 1.0);
         P y = c.param(name + ".y", Shape{2, 1, 7, 7, 7}, 0.0, 1.0);
         auto cfg = metrics::SSIMConfig::single_scale();
         cfg.window_edge = 5;
         Targets t{&x, &y};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return metrics::msssim_loss(tape.parameter(x), tape.parameter(y), cfg);
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"msssim_loss",
       [](const Ctx& c, const std::string& name) {
         P x = c.param(name + ".x", Shape{1, 1, 12, 12, 12}, 0.0, 1.0);
         Volume<double> yv(x.value.shape());
         const CounterRng r = c.rng.stream(name + ".y");
         for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = 0.6 * x.value[i] + 0.4 * r.uniform(i);
         P y(name + ".y", yv);
         Targets t{&x, &y};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        return metrics::msssim_loss(tape.parameter(x), tape.parameter(y),
                                                                    metrics::SSIMConfig::multi_scale());
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"adversarial_losses",
       [](const Ctx& c, const std::string& name) {
         P real = c.param(name + ".d_real", Shape{4, 1, 1, 1, 1}, -3, 3);
         P fake = c.param(name + ".d_fake", Shape{4, 1, 1, 1, 1}, -3, 3);
         Targets t{&real, &fake};
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) {
                                        const auto l = metrics::adversarial_losses(tape.parameter(real),
                                                                                   tape.parameter(fake));
                                        return add(l.discriminator, scale(l.generator, 0.7));
                                      },
                                      c.grad_options()),
                       c.options.tolerance);
       }},
      {"discriminator_reduced",
       [](const Ctx& c, const std::string& name) {
         net::DiscriminatorConfig dc;
         dc.channel_ladder = {2, 3, 4, 5};
         dc.conditional = true;
         net::Discriminator<double> d(dc, c.options.seed);
         c.jitter(d.params());
         P x = c.param(name + ".x", Shape{2, 2, 16, 16, 16}, 0.0, 1.0);
         Targets t = all_of(d.params());
         t.push_back(&x);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) { return d.forward(tape.parameter(x)); },
                                      c.grad_options(1e-6)),
                       c.options.tolerance);
       }},
      {"generator_reduced",
       [](const Ctx& c, const std::string& name) {
         net::Generator<double> g(reduced_generator(), c.options.seed);
         c.jitter(g.params());
         g.params().at("generator.sa.gamma").value[0] = 0.7;
         P x = c.param(name + ".x", Shape{2, 1, 8, 8, 8}, 0.0, 1.0);
         Targets t = all_of(g.params());
         t.push_back(&x);
         return finish(gradient_check(name, t,
                                      [&](Tape<double>& tape) { return g.forward(tape.parameter(x)); },
                                      c.grad_options(1e-6)),
                       c.options.tolerance);
       }},
  };
  return table;
}

}  // namespace

std::vector<std::string> gradient_check_names() {
  std::vector<std::string> names;
  for (const auto& [name, check] : checks()) names.push_back(name);
  return names;
}

std::vector<CheckResult> run_gradient_suite(const GradientSuiteOptions& options) {
  const Ctx ctx{options, CounterRng(options.seed)};
  std::vector<CheckResult> results;
  for (const auto& [name, check] : checks()) {
    if (!options.filter.empty() && name.find(options.filter) == std::string::npos) continue;
    results.push_back(check(ctx, name));
  }
  return results;
}

}  // namespace pcsa::verify
