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

#include "pcsa/metrics/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pcsa::metrics {

namespace {

template <typename T>
void require_same_shape(const Volume<T>& x, const Volume<T>& y, const char* what) {
  if (!(x.shape() == y.shape())) {
    throw ShapeError(std::string(what) + ": shape mismatch " + x.shape().str() + " vs " +
                     y.shape().str());
  }
}

template <typename T>
double mean_abs(const Volume<T>& x, const Volume<T>& y) {
  require_same_shape(x, y, "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += std::abs(static_cast<double>(x[i]) - static_cast<double>(y[i]));
  }
  return total / static_cast<double>(x.size());
}

template <typename T>
double mean_sq(const Volume<T>& x, const Volume<T>& y) {
  require_same_shape(x, y, "mse");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    total += d * d;
  }
  return total / static_cast<double>(x.size());
}

template <typename T>
double psnr_impl(const Volume<T>& x, const Volume<T>& y, double data_range) {
  if (!(data_range > 0.0)) throw std::invalid_argument("psnr: data_range must be positive");
  const double m = mean_sq(x, y);
  if (m == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(data_range * data_range / m);
}

double ssim_value(const Volume<double>& x, const Volume<double>& y, const SSIMConfig& cfg) {
  require_same_shape(x, y, "ssim");
  Tape<double> tape;
  return ms_ssim(tape.constant(x), tape.constant(y), cfg).value()[0];
}

}  // namespace

double mae(const Volume<float>& x, const Volume<float>& y) { return mean_abs(x, y); }
double mae(const Volume<double>& x, const Volume<double>& y) { return mean_abs(x, y); }
double mse(const Volume<float>& x, const Volume<float>& y) { return mean_sq(x, y); }

double psnr(const Volume<float>& x, const Volume<float>& y, double data_range) {
  return psnr_impl(x, y, data_range);
}
double psnr(const Volume<double>& x, const Volume<double>& y, double data_range) {
  return psnr_impl(x, y, data_range);
}

double ssim(const Volume<float>& x, const Volume<float>& y, const SSIMConfig& cfg) {
  return ssim_value(x.cast<double>(), y.cast<double>(), cfg);
}
double ssim(const Volume<double>& x, const Volume<double>& y, const SSIMConfig& cfg) {
  return ssim_value(x, y, cfg);
}
double ms_ssim(const Volume<float>& x, const Volume<float>& y, const SSIMConfig& cfg) {
  return ssim_value(x.cast<double>(), y.cast<double>(), cfg);
}
double ms_ssim(const Volume<double>& x, const Volume<double>& y, const SSIMConfig& cfg) {
  return ssim_value(x, y, cfg);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  const std::size_t n = values.size();
  if (n == 0) return s;
  std::size_t infinite = 0;
  double total = 0.0;
  for (double v : values) {
    if (std::isinf(v) && v > 0) {
      ++infinite;
    } else {
      total += v;
    }
  }
  if (infinite > 0) {
    s.mean = kPsnrIdentical;
    s.std = infinite == n ? 0.0 : kPsnrIdentical;
    return s;
  }
  s.mean = total / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

MetricReport MetricReport::from_pairs(std::vector<PairMetrics> pairs) {
  MetricReport r;
  r.pairs = std::move(pairs);
  std::vector<double> a, b, c;
  for (const auto& p : r.pairs) {
    a.push_back(p.mae);
    b.push_back(p.psnr_db);
    c.push_back(p.ssim);
  }
  r.mae = summarize(a);
  r.psnr_db = summarize(b);
  r.ssim = summarize(c);
  return r;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os << "pair_id,mae,psnr_db,ssim\n";
  for (const auto& p : pairs) {
    os << p.id << ',' << format_number(p.mae) << ',' << format_number(p.psnr_db) << ','
       << format_number(p.ssim) << '\n';
  }
  os << "mean," << format_number(mae.mean) << ',' << format_number(psnr_db.mean) << ','
     << format_number(ssim.mean) << '\n';
  os << "std," << format_number(mae.std) << ',' << format_number(psnr_db.std) << ','
     << format_number(ssim.std) << '\n';
  return os.str();
}

namespace {
double parse_number(std::string_view s) {
  if (s == "inf") return kPsnrIdentical;
  if (s == "-inf") return -kPsnrIdentical;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("metric report: bad number '" + std::string(s) + "'");
  }
  return v;
}
}  // namespace

MetricReport MetricReport::from_csv(std::string_view text) {
  std::vector<PairMetrics> pairs;
  std::istringstream is{std::string(text)};
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      if (line != "pair_id,mae,psnr_db,ssim") throw std::invalid_argument("metric report: bad header");
      header = false;
      continue;
    }
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      cols.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    cols.push_back(rest);
    if (cols.size() != 4) throw std::invalid_argument("metric report: expected 4 columns: " + line);
    if (cols[0] == "mean" || cols[0] == "std") continue;
    pairs.push_back({std::string(cols[0]), parse_number(cols[1]), parse_number(cols[2]),
                     parse_number(cols[3])});
  }
  return from_pairs(std::move(pairs));
}

MetricReport evaluate_pairs(std::span<const EvalPair> pairs, const SSIMConfig& cfg) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_pairs: no pairs");
  std::vector<PairMetrics> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.generated || !p.target) throw std::invalid_argument("evaluate_pairs: null volume");
    out.push_back({p.id, mae(*p.generated, *p.target), psnr(*p.generated, *p.target, cfg.data_range),
                   ssim(*p.generated, *p.target, cfg)});
  }
  return MetricReport::from_pairs(std::move(out));
}

}  // namespace pcsa::metrics
