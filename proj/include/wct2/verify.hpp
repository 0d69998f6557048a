/*
 * Copyright 2026 The WCT2 Authors
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

// Weight-independent invariant suite run on seeded random data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "wct2/network.hpp"
#include "wct2/stylize.hpp"
#include "wct2/wavelet.hpp"

namespace wct2::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  std::uint64_t seed = 42;
  /// Test hook: analysis kernels used by the frame checks. Perturbing them
  /// must make those checks fail.
  HaarFilterBank bank = HaarFilterBank::standard();
};

inline FeatureMap random_map(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w,
                             float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> d(lo, hi);
  FeatureMap f(c, h, w);
  for (float& v : f.values()) v = d(rng);
  return f;
}

/// Features with a random mixing across channels plus a random offset, so
/// the covariance is full and non-diagonal.
inline FeatureMap random_correlated(std::mt19937_64& rng, std::size_t c, std::size_t n) {
  const FeatureMap z = random_map(rng, c, 1, n);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> mix(c * c), offset(c);
  for (auto& v : mix) v = d(rng);
  for (std::size_t i = 0; i < c; ++i) mix[i * c + i] += 2.0;
  for (auto& v : offset) v = 3.0 * d(rng);
  FeatureMap out(c, 1, n);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t p = 0; p < n; ++p) {
      double s = offset[i];
      for (std::size_t k = 0; k < c; ++k) s += mix[i * c + k] * z.at(k, 0, p);
      out.at(i, 0, p) = static_cast<float>(s);
    }
  return out;
}

/// Direct quadruple-loop cross-correlation used as the conv2d reference.
inline FeatureMap naive_conv(const FeatureMap& in, const ConvLayer& l, PaddingMode mode) {
  const auto h = static_cast<std::ptrdiff_t>(in.height()), w = static_cast<std::ptrdiff_t>(in.width());
  FeatureMap out(l.out_channels, in.height(), in.width());
  auto sample = [&](std::size_t c, std::ptrdiff_t y, std::ptrdiff_t x) -> double {
    if (mode == PaddingMode::zero) {
      if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    } else {
      y = y < 0 ? -y : (y >= h ? 2 * h - 2 - y : y);
      x = x < 0 ? -x : (x >= w ? 2 * w - 2 - x : x);
    }
    return in.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  };
  for (std::size_t o = 0; o < l.out_channels; ++o)
    for (std::ptrdiff_t y = 0; y < h; ++y)
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        double s = l.bias[o];
        for (std::size_t c = 0; c < l.in_channels; ++c)
          for (std::ptrdiff_t ky = 0; ky < 3; ++ky)
            for (std::ptrdiff_t kx = 0; kx < 3; ++kx)
              s += static_cast<double>(l.weight(o, c, static_cast<std::size_t>(ky),
                                                static_cast<std::size_t>(kx))) *
                   sample(c, y + ky - 1, x + kx - 1);
        out.at(o, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = static_cast<float>(s);
      }
  return out;
}

inline double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  detail::require(a.same_shape(b), "max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.values()[i]) - b.values()[i]));
  return m;
}

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::vector<FeatureMap> frame_corpus(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> ch(1, 8), half(1, 32);
  std::vector<FeatureMap> corpus;
  for (int i = 0; i < 100; ++i) {
    const std::size_t c = ch(rng), h = 2 * half(rng), w = 2 * half(rng);
    corpus.push_back(random_map(rng, c, h, w));
  }
  return corpus;
}

}  // namespace detail

inline std::vector<CheckResult> run_all(const Options& opt) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(opt.seed);

  const auto corpus = detail::frame_corpus(rng);
  {
    double worst = 0.0;
    for (const auto& x : corpus)
      worst = std::max(worst, max_abs_diff(haar_unpool(haar_pool(x, opt.bank), opt.bank), x));
    out.push_back({"perfect_reconstruction", worst < 1e-5, detail::fmt("max |err| = %.3e", worst)});
  }
  {
    double worst = 0.0;
    for (const auto& x : corpus) {
      const double e = squared_norm(x);
      worst = std::max(worst, std::abs(e - haar_pool(x, opt.bank).energy()) / e);
    }
    out.push_back({"tight_frame_energy", worst < 1e-6, detail::fmt("max rel err = %.3e", worst)});
  }
  {
    const auto g = opt.bank.gram();
    double worst = 0.0;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) worst = std::max(worst, std::abs(g[a][b] - (a == b)));
    out.push_back({"kernel_orthonormality", worst < 1e-7, detail::fmt("max |KK^T - I| = %.3e", worst)});
  }
  {
    double off = 0.0, diag = 0.0, color_err = 0.0;
    for (std::size_t c : {4u, 8u, 32u}) {
      const std::size_t n = 64 * c;
      const FeatureMap content = random_correlated(rng, c, n);
      const FeatureMap style = random_correlated(rng, c, n);
      const FeatureMap w = whiten(content, compute_stats(content));
      const Matrix cov = compute_stats(w).covariance;
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
          if (i == j)
            diag = std::max(diag, std::abs(cov(i, j) - 1.0));
          else
            off = std::max(off, std::abs(cov(i, j)));
        }
      const StyleStats ss = compute_stats(style);
      const FeatureMap colored = color(w, ss);
      color_err = std::max(color_err, frobenius_distance(compute_stats(colored).covariance,
                                                         ss.covariance) /
                                          ss.covariance.frobenius());
    }
    out.push_back({"whitening", off < 1e-4 && diag < 1e-3,
                   detail::fmt("max off-diag = %.3e", off) + detail::fmt(", max |diag-1| = %.3e", diag)});
    out.push_back({"coloring", color_err < 1e-3, detail::fmt("max rel Frobenius = %.3e", color_err)});
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const FeatureMap content = random_correlated(rng, 8, 256);
      const FeatureMap style = random_correlated(rng, 8, 256);
      const FeatureMap o = adain(content, style);
      const PixelMask all = PixelMask::all(o.plane_size());
      const StyleStats so = compute_stats(o, all), ss = compute_stats(style, all);
      for (std::size_t c = 0; c < 8; ++c) {
        worst = std::max(worst, std::abs(so.mean[c] - ss.mean[c]));
        worst = std::max(worst, std::abs(so.channel_std[c] - ss.channel_std[c]));
      }
    }
    out.push_back({"adain_moments", worst < 1e-5, detail::fmt("max moment err = %.3e", worst)});
  }
  {
    double worst = 0.0;
    std::uniform_int_distribution<std::size_t> ch(1, 8), sp(2, 16);
    std::normal_distribution<float> wd(0.0f, 0.3f);
    for (int i = 0; i < 50; ++i) {
      const std::size_t ci = ch(rng), co = ch(rng), h = sp(rng), w = sp(rng);
      ConvLayer l{co, ci, std::vector<float>(co * ci * 9), std::vector<float>(co)};
      for (float& v : l.weights) v = wd(rng);
      for (float& v : l.bias) v = wd(rng);
      const FeatureMap x = random_map(rng, ci, h, w);
      const PaddingMode mode = (i % 2) ? PaddingMode::zero : PaddingMode::reflect;
      worst = std::max(worst, max_abs_diff(conv2d(x, l, mode), naive_conv(x, l, mode)));
    }
    out.push_back({"conv_oracle", worst < 1e-6, detail::fmt("max |err| = %.3e", worst)});
  }
  {
    const Model sum = build_model(make_synthetic_weights(opt.seed, UnpoolMode::sum),
                                  {UnpoolMode::sum, PoolingKind::haar});
    const Model cat = build_model(make_synthetic_weights(opt.seed, UnpoolMode::concat),
                                  {UnpoolMode::concat, PoolingKind::haar});
    const bool counts_ok =
        sum.encoder_parameter_count() == plan_parameter_count(encoder_plan()) &&
        sum.decoder_parameter_count() == plan_parameter_count(decoder_plan(UnpoolMode::sum)) &&
        cat.decoder_parameter_count() == plan_parameter_count(decoder_plan(UnpoolMode::concat));
    const double ratio = static_cast<double>(cat.decoder_parameter_count()) /
                         static_cast<double>(sum.decoder_parameter_count());
    out.push_back({"parameter_plan", counts_ok,
                   detail::fmt("concat/sum decoder params = %.4f", ratio)});
  }
  {
    const FeatureMap x = random_map(rng, 3, 32, 32, 0.0f, 1.0f);
    const double haar_err = max_abs_diff(reconstruct(Model::plumbing(PoolingKind::haar), x), x);
    const double max_err = max_abs_diff(reconstruct(Model::plumbing(PoolingKind::max), x), x);
    out.push_back({"pooling_ablation", haar_err < 1e-5 && max_err > 0.0,
                   detail::fmt("haar err = %.3e", haar_err) + detail::fmt(", max-pool err = %.3e", max_err)});
  }
  return out;
}

inline std::string format_table(const std::vector<CheckResult>& results) {
  std::string s;
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-24s %-4s  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                  r.detail.c_str());
    s += buf;
  }
  return s;
}

}  // namespace wct2::verify
