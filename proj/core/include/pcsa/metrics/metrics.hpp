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

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pcsa/metrics/ssim.hpp"

namespace pcsa::metrics {

/// Value returned by psnr() for identical inputs.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// Evaluation metrics. Inputs are promoted to double; shapes must match.
double mae(const Volume<float>& x, const Volume<float>& y);
double mse(const Volume<float>& x, const Volume<float>& y);
double psnr(const Volume<float>& x, const Volume<float>& y, double data_range = 1.0);
double ssim(const Volume<float>& x, const Volume<float>& y,
            const SSIMConfig& cfg = SSIMConfig::single_scale());
double ms_ssim(const Volume<float>& x, const Volume<float>& y,
               const SSIMConfig& cfg = SSIMConfig::multi_scale());

double mae(const Volume<double>& x, const Volume<double>& y);
double psnr(const Volume<double>& x, const Volume<double>& y, double data_range = 1.0);
double ssim(const Volume<double>& x, const Volume<double>& y,
            const SSIMConfig& cfg = SSIMConfig::single_scale());
double ms_ssim(const Volume<double>& x, const Volume<double>& y,
               const SSIMConfig& cfg = SSIMConfig::multi_scale());

struct PairMetrics {
  std::string id;
  double mae = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct Summary {
  double mean = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single value.
  double std = 0.0;
};

/// Mean and sample std. If any value is +inf the mean is +inf and the std is
/// 0 when all values are +inf, +inf otherwise.
Summary summarize(std::span<const double> values);

struct MetricReport {
  std::vector<PairMetrics> pairs;
  Summary mae;
  Summary psnr_db;
  Summary ssim;

  std::size_t count() const { return pairs.size(); }

  /// Recomputes the summaries from `pairs`.
  static MetricReport from_pairs(std::vector<PairMetrics> pairs);

  /// pair_id,mae,psnr_db,ssim then one row per pair and the rows "mean" and
  /// "std". +inf is written as "inf".
  std::string to_csv() const;
  /// Reads the per-pair rows back and recomputes the summaries.
  static MetricReport from_csv(std::string_view text);
};

struct EvalPair {
  std::string id;
  const Volume<float>* generated = nullptr;
  const Volume<float>* target = nullptr;
};

MetricReport evaluate_pairs(std::span<const EvalPair> pairs,
                            const SSIMConfig& cfg = SSIMConfig::single_scale());

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double v);

}  // namespace pcsa::metrics
