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


#include "pcsa/verify/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pcsa/tensor/rng.hpp"

namespace pcsa::verify {
namespace {

// One single-channel volume with explicit extents.
struct Grid {
  std::size_t d = 0, h = 0, w = 0;
  std::vector<double> v;
  double at(std::size_t i, std::size_t j, std::size_t k) const { return v[(i * h + j) * w + k]; }
};

Grid extract(const Volume<double>& x, std::size_t item) {
  const Shape& s = x.shape();
  if (s.channels != 1) throw ShapeError("reference ssim expects one channel, got " + s.str());
  Grid g{s.depth, s.height, s.width, {}};
  g.v.reserve(s.spatial());
  for (std::size_t i = 0; i < s.depth; ++i)
    for (std::size_t j = 0; j < s.height; ++j)
      for (std::size_t k = 0; k < s.width; ++k) g.v.push_back(x.at(item, 0, i, j, k));
  return g;
}

Grid halve(const Grid& g) {
  Grid out{g.d / 2, g.h / 2, g.w / 2, {}};
  for (std::size_t i = 0; i < out.d; ++i)
    for (std::size_t j = 0; j < out.h; ++j)
      for (std::size_t k = 0; k < out.w; ++k) {
        double acc = 0.0;
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c) acc += g.at(2 * i + a, 2 * j + b, 2 * k + c);
        out.v.push_back(acc / 8.0);
      }
  return out;
}

// Full 3-D window normalised over all edge^3 taps.
std::vector<double> window3(std::size_t edge, const metrics::SSIMConfig& cfg) {
  std::vector<double> w(edge * edge * edge);
  const double mid = (static_cast<double>(edge) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t a = 0; a < edge; ++a)
    for (std::size_t b = 0; b < edge; ++b)
      for (std::size_t c = 0; c < edge; ++c) {
        double v = 1.0;
        if (cfg.window_kind == metrics::WindowKind::kGaussian) {
          const double da = a - mid, db = b - mid, dc = c - mid;
          v = std::exp(-(da * da + db * db + dc * dc) / (2.0 * cfg.sigma * cfg.sigma));
        }
        w[(a * edge + b) * edge + c] = v;
        total += v;
      }
  for (double& v : w) v /= total;
  return w;
}

// max(v, 0)^p for fractional p; p == 1 keeps the sign.
double power(double v, double p) {
  if (p == 1.0) return v;
  return v > 0.0 ? std::pow(v, p) : 0.0;
}

std::size_t fit_window(std::size_t smallest, const metrics::SSIMConfig& cfg) {
  std::size_t coarse = smallest;
  for (std::size_t j = 1; j < cfg.scale_exponents.size(); ++j) coarse /= 2;
  if (!cfg.auto_window) {
    if (cfg.window_edge > coarse) throw ShapeError("reference ssim: window does not fit");
    return cfg.window_edge;
  }
  std::size_t edge = std::min(cfg.window_edge, coarse);
  if (edge % 2 == 0) --edge;
  if (edge == 0) throw ShapeError("reference ssim: volume too small");
  return edge;
}

}  // namespace

double reference_ms_ssim(const Volume<double>& x, const Volume<double>& y, std::size_t item,
                         const metrics::SSIMConfig& cfg) {
  if (x.shape() != y.shape()) throw ShapeError("reference ssim: shape mismatch");
  Grid gx = extract(x, item);
  Grid gy = extract(y, item);
  const std::size_t edge = fit_window(std::min({gx.d, gx.h, gx.w}), cfg);
  const std::vector<double> win = window3(edge, cfg);
  const double c1 = std::pow(cfg.k1 * cfg.data_range, 2);
  const double c2 = std::pow(cfg.k2 * cfg.data_range, 2);
  const double c3 = c2 / 2.0;
  const std::size_t m = cfg.scale_exponents.size();

  double product = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (j > 0) {
      gx = halve(gx);
      gy = halve(gy);
    }
    const auto& e = cfg.scale_exponents[j];
    const bool last = j + 1 == m;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + edge <= gx.d; ++i)
      for (std::size_t jj = 0; jj + edge <= gx.h; ++jj)
        for (std::size_t k = 0; k + edge <= gx.w; ++k) {
          double mx = 0.0, my = 0.0;
          for (std::size_t a = 0; a < edge; ++a)
            for (std::size_t b = 0; b < edge; ++b)
              for (std::size_t c = 0; c < edge; ++c) {
                const double wt = win[(a * edge + b) * edge + c];
                mx += wt * gx.at(i + a, jj + b, k + c);
                my += wt * gy.at(i + a, jj + b, k + c);
              }
          double vx = 0.0, vy = 0.0, cov = 0.0;
          for (std::size_t a = 0; a < edge; ++a)
            for (std::size_t b = 0; b < edge; ++b)
              for (std::size_t c = 0; c < edge; ++c) {
                const double wt = win[(a * edge + b) * edge + c];
                const double dx = gx.at(i + a, jj + b, k + c) - mx;
                const double dy = gy.at(i + a, jj + b, k + c) - my;
                vx += wt * dx * dx;
                vy += wt * dy * dy;
                cov += wt * dx * dy;
              }
          const double sx = std::sqrt(vx), sy = std::sqrt(vy);
          const double contrast = (2.0 * sx * sy + c2) / (vx + vy + c2);
          const double structure = (cov + c3) / (sx * sy + c3);
          double term = power(contrast, e.beta) * power(structure, e.gamma);
          if (last) term *= power((2.0 * mx * my + c1) / (mx * mx + my * my + c1), e.alpha);
          total += term;
          ++count;
        }
    product *= total / static_cast<double>(count);
  }
  return product;
}

CheckResult ssim_oracle_sweep(const std::string& name, const metrics::SSIMConfig& cfg,
                              const OracleSweepOptions& options) {
  CheckResult result;
  result.name = name;
  result.tolerance = options.tolerance;
  const CounterRng rng(options.seed);
  std::size_t worst_case = 0, worst_edge = 0;
  for (std::size_t n = 0; n < options.cases; ++n) {
    const CounterRng r = rng.stream(n);
    const auto edge = static_cast<std::size_t>(r.uniform_int(
        0, static_cast<std::int64_t>(options.min_edge), static_cast<std::int64_t>(options.max_edge)));
    // Blend weight 0 gives independent noise, 1 a lightly perturbed copy.
    const double blend = r.uniform(1);
    const double offset = r.uniform(2, -0.2, 0.2);
    const Shape s = cube(1, edge);
    Volume<double> x(s), y(s);
    const CounterRng vx = r.stream("x"), vy = r.stream("y"), vn = r.stream("noise");
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = vx.uniform(i);
      const double v = blend * x[i] + (1.0 - blend) * vy.uniform(i) + 0.05 * vn.normal(i) + offset;
      y[i] = std::clamp(v, 0.0, 1.0);
    }
    Tape<double> tape;
    const double got = metrics::ms_ssim_per_item(tape.constant(x), tape.constant(y), cfg).value()[0];
    const double want = reference_ms_ssim(x, y, 0, cfg);
    const double err = std::abs(got - want);
    if (!std::isfinite(got) || !std::isfinite(want)) {
      result.max_error = std::numeric_limits<double>::infinity();
      worst_case = n;
      worst_edge = edge;
    } else if (err > result.max_error) {
      result.max_error = err;
      worst_case = n;
      worst_edge = edge;
    }
  }
  result.passed = result.max_error <= options.tolerance;
  std::ostringstream os;
  os << options.cases << " pairs, worst case " << worst_case << " (edge " << worst_edge << ")";
  result.detail = os.str();
  return result;
}

}  // namespace pcsa::verify
