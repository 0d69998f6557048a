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

// Feature-space stylization: whitening and coloring (WCT) and AdaIN, either
// over the whole map or independently per matched segmentation label.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wct2/linalg.hpp"
#include "wct2/tensor.hpp"

namespace wct2 {

inline constexpr double kEigenFloor = 1e-5;
inline constexpr double kStdFloor = 1e-8;

/// Subset of pixel positions (flat y*W+x indices, ascending) of a plane.
class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(std::vector<std::size_t> indices, std::size_t plane_size)
      : indices_(std::move(indices)), plane_size_(plane_size) {
    detail::require(std::is_sorted(indices_.begin(), indices_.end()) &&
                        std::adjacent_find(indices_.begin(), indices_.end()) == indices_.end(),
                    "PixelMask: indices must be strictly ascending");
    detail::require(indices_.empty() || indices_.back() < plane_size_,
                    "PixelMask: index outside the plane");
  }

  static PixelMask all(std::size_t plane_size) {
    std::vector<std::size_t> idx(plane_size);
    std::iota(idx.begin(), idx.end(), 0);
    return PixelMask(std::move(idx), plane_size);
  }

  std::span<const std::size_t> indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  std::size_t plane_size() const { return plane_size_; }
  bool empty() const { return indices_.empty(); }

 private:
  std::vector<std::size_t> indices_;
  std::size_t plane_size_ = 0;
};

/// Per-pixel integer labels, row-major.
struct SegmentationMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::int32_t> labels;

  SegmentationMap() = default;
  SegmentationMap(std::size_t h, std::size_t w, std::vector<std::int32_t> l)
      : height(h), width(w), labels(std::move(l)) {
    detail::require(labels.size() == h * w, "SegmentationMap: label count != height*width");
    detail::require(std::all_of(labels.begin(), labels.end(), [](auto v) { return v >= 0; }),
                    "SegmentationMap: labels must be nonnegative");
  }

  std::int32_t at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }

  std::set<std::int32_t> label_set() const { return {labels.begin(), labels.end()}; }

  PixelMask mask_for(std::int32_t label) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) idx.push_back(i);
    return PixelMask(std::move(idx), labels.size());
  }

  /// Nearest-neighbour resampling; every output label is copied from some
  /// input pixel, so no new labels appear.
  SegmentationMap resized_nearest(std::size_t h, std::size_t w) const {
    detail::require(h > 0 && w > 0 && height > 0 && width > 0,
                    "SegmentationMap: cannot resize to or from an empty map");
    std::vector<std::int32_t> out(h * w);
    for (std::size_t y = 0; y < h; ++y) {
      const std::size_t sy = std::min(height - 1, (y * height) / h);
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t sx = std::min(width - 1, (x * width) / w);
        out[y * w + x] = labels[sy * width + sx];
      }
    }
    return SegmentationMap(h, w, std::move(out));
  }
};

/// Paired content/style label maps, each at its own feature resolution.
struct RegionPairing {
  SegmentationMap content;
  SegmentationMap style;
};

struct StyleStats {
  std::vector<double> mean;
  Matrix covariance;
  /// Eigenpairs of covariance with eigenvalue above the floor.
  SymmetricEigen eigen;
  std::vector<double> channel_std;
  std::size_t pixel_count = 0;

  std::size_t channels() const { return mean.size(); }
};

using WarningSink = std::function<void(const std::string&)>;

struct TransformOptions {
  /// Blend weight of the transformed features against the content.
  double alpha = 1.0;
  double eigen_floor = kEigenFloor;
  WarningSink warn;
};

namespace detail {

// Gathers the masked pixels of every channel into a C x n double matrix.
inline std::vector<double> gather(const FeatureMap& f, std::span<const std::size_t> idx) {
  const std::size_t n = idx.size();
  std::vector<double> x(f.channels() * n);
  for (std::size_t c = 0; c < f.channels(); ++c) {
    const auto plane = f.channel(c);
    double* dst = x.data() + c * n;
    for (std::size_t p = 0; p < n; ++p) dst[p] = plane[idx[p]];
  }
  return x;
}

inline void check_mask(const FeatureMap& f, const PixelMask& mask, const char* op) {
  require(mask.plane_size() == f.plane_size(),
          std::string(op) + ": mask plane size does not match features " + shape_string(f));
}

// out[:, idx] = M * (x - shift) + offset  for the masked pixels only.
inline void apply_affine(FeatureMap& out, const FeatureMap& in, const PixelMask& mask,
                         const Matrix& m, const std::vector<double>& shift,
                         const std::vector<double>& offset) {
  const std::size_t c = in.channels(), n = mask.size();
  std::vector<double> x = gather(in, mask.indices());
  for (std::size_t ch = 0; ch < c; ++ch) {
    double* row = x.data() + ch * n;
    for (std::size_t p = 0; p < n; ++p) row[p] -= shift[ch];
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < c; ++i) {
    std::fill(y.begin(), y.end(), offset[i]);
    const double* mrow = m.row(i);
    for (std::size_t k = 0; k < c; ++k) {
      const double a = mrow[k];
      if (a == 0.0) continue;
      const double* src = x.data() + k * n;
      for (std::size_t p = 0; p < n; ++p) y[p] += a * src[p];
    }
    auto plane = out.channel(i);
    const auto idx = mask.indices();
    for (std::size_t p = 0; p < n; ++p) plane[idx[p]] = static_cast<float>(y[p]);
  }
}

}  // namespace detail

/// Mean, (n-1)-normalized covariance and its floored eigendecomposition over
/// the masked pixels.
inline StyleStats compute_stats(const FeatureMap& features, const PixelMask& mask,
                                double eigen_floor = kEigenFloor) {
  detail::require(!features.empty(), "compute_stats: empty features");
  detail::check_mask(features, mask, "compute_stats");
  detail::require(all_finite(features), "compute_stats: non-finite feature values");
  const std::size_t n = mask.size(), c = features.channels();
  if (n < 2)
    throw DegenerateRegion("compute_stats: region has " + std::to_string(n) +
                           " pixels, need at least 2");

  std::vector<double> x = detail::gather(features, mask.indices());
  StyleStats s;
  s.pixel_count = n;
  s.mean.assign(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double* row = x.data() + ch * n;
    double sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) sum += row[p];
    s.mean[ch] = sum / static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p) row[p] -= s.mean[ch];
  }
  s.covariance = Matrix(c);
  const double norm = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < c; ++i) {
    const double* xi = x.data() + i * n;
    for (std::size_t j = i; j < c; ++j) {
      const double* xj = x.data() + j * n;
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += xi[p] * xj[p];
      s.covariance(i, j) = s.covariance(j, i) = acc * norm;
    }
  }
  s.channel_std.resize(c);
  for (std::size_t ch = 0; ch < c; ++ch) s.channel_std[ch] = std::sqrt(s.covariance(ch, ch));
  s.eigen = symmetric_eigen(s.covariance, eigen_floor);
  return s;
}

inline StyleStats compute_stats(const FeatureMap& features, double eigen_floor = kEigenFloor) {
  return compute_stats(features, PixelMask::all(features.plane_size()), eigen_floor);
}

inline Matrix whitening_matrix(const StyleStats& stats) {
  if (stats.eigen.rank() == 0) throw DegenerateRegion("whiten: no eigenvalue above the floor");
  return spectral_function(stats.eigen, [](double l) { return 1.0 / std::sqrt(l); });
}

inline Matrix coloring_matrix(const StyleStats& stats) {
  if (stats.eigen.rank() == 0) throw DegenerateRegion("color: no eigenvalue above the floor");
  return spectral_function(stats.eigen, [](double l) { return std::sqrt(l); });
}

/// E * L^-1/2 * E^T * (f - mean) on the masked pixels; others are copied.
inline FeatureMap whiten(const FeatureMap& features, const StyleStats& stats,
                         const PixelMask& mask) {
  detail::check_mask(features, mask, "whiten");
  detail::require(stats.channels() == features.channels(), "whiten: channel mismatch");
  const Matrix w = whitening_matrix(stats);
  FeatureMap out = features;
  detail::apply_affine(out, features, mask, w, stats.mean,
                       std::vector<double>(features.channels(), 0.0));
  return out;
}

inline FeatureMap whiten(const FeatureMap& features, const StyleStats& stats) {
  return whiten(features, stats, PixelMask::all(features.plane_size()));
}

/// E_s * L_s^1/2 * E_s^T * w + mean_s on the masked pixels; others are copied.
inline FeatureMap color(const FeatureMap& whitened, const StyleStats& style,
                        const PixelMask& mask) {
  detail::check_mask(whitened, mask, "color");
  detail::require(style.channels() == whitened.channels(), "color: channel mismatch");
  const Matrix m = coloring_matrix(style);
  FeatureMap out = whitened;
  detail::apply_affine(out, whitened, mask, m, std::vector<double>(whitened.channels(), 0.0),
                       style.mean);
  return out;
}

inline FeatureMap color(const FeatureMap& whitened, const StyleStats& style) {
  return color(whitened, style, PixelMask::all(whitened.plane_size()));
}

namespace detail {

inline FeatureMap blend(const FeatureMap& transformed, const FeatureMap& content, double alpha) {
  if (alpha == 1.0) return transformed;
  FeatureMap out = content;
  auto dst = out.values();
  auto t = transformed.values();
  auto c = content.values();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = static_cast<float>(alpha * t[i] + (1.0 - alpha) * c[i]);
  return out;
}

inline void check_pair(const FeatureMap& content, const FeatureMap& style, double alpha,
                       const char* op) {
  require(!content.empty() && !style.empty(), std::string(op) + ": empty features");
  require(content.channels() == style.channels(),
          std::string(op) + ": content has " + std::to_string(content.channels()) +
              " channels, style has " + std::to_string(style.channels()));
  require(alpha >= 0.0 && alpha <= 1.0, std::string(op) + ": alpha must lie in [0, 1]");
}

// One matched region: the content pixels to transform and the style pixels
// whose statistics drive them. A null style mask means "use global style".
struct RegionPlan {
  PixelMask content;
  std::optional<PixelMask> style;
  bool content_global = false;
};

// Regions with fewer than min_pixels pixels are degenerate.
inline std::vector<RegionPlan> plan_regions(const FeatureMap& content, const FeatureMap& style,
                                            const RegionPairing& seg, std::size_t min_pixels,
                                            const WarningSink& warn, const char* op) {
  require(seg.content.height == content.height() && seg.content.width == content.width(),
          std::string(op) + ": content segmentation does not match content features");
  require(seg.style.height == style.height() && seg.style.width == style.width(),
          std::string(op) + ": style segmentation does not match style features");
  const auto style_labels = seg.style.label_set();
  std::vector<RegionPlan> plans;
  for (std::int32_t label : seg.content.label_set()) {
    RegionPlan plan{seg.content.mask_for(label), std::nullopt, false};
    if (plan.content.size() < min_pixels) plan.content_global = true;
    if (!style_labels.contains(label)) {
      if (warn)
        warn(std::string(op) + ": label " + std::to_string(label) +
             " absent from style segmentation, using global style statistics");
    } else {
      PixelMask sm = seg.style.mask_for(label);
      if (sm.size() >= min_pixels) plan.style = std::move(sm);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

}  // namespace detail

/// Whitening-and-coloring transform over the whole map.
inline FeatureMap wct(const FeatureMap& content, const FeatureMap& style,
                      const TransformOptions& opt = {}) {
  detail::check_pair(content, style, opt.alpha, "wct");
  if (opt.alpha == 0.0) return content;
  const StyleStats cs = compute_stats(content, opt.eigen_floor);
  const StyleStats ss = compute_stats(style, opt.eigen_floor);
  const Matrix m = coloring_matrix(ss) * whitening_matrix(cs);
  FeatureMap out = content;
  detail::apply_affine(out, content, PixelMask::all(content.plane_size()), m, cs.mean, ss.mean);
  return detail::blend(out, content, opt.alpha);
}

/// Label-matched WCT: each content label region takes the statistics of the
/// same label in the style. Degenerate or unmatched regions use global stats.
inline FeatureMap wct(const FeatureMap& content, const FeatureMap& style,
                      const RegionPairing& seg, const TransformOptions& opt = {}) {
  detail::check_pair(content, style, opt.alpha, "wct");
  if (opt.alpha == 0.0) return content;
  const std::size_t min_pixels = std::max<std::size_t>(2, content.channels());
  const auto plans = detail::plan_regions(content, style, seg, min_pixels, opt.warn, "wct");

  std::optional<Matrix> global_white, global_color;
  std::optional<StyleStats> global_cs, global_ss;
  auto content_global = [&]() -> const StyleStats& {
    if (!global_cs) global_cs = compute_stats(content, opt.eigen_floor);
    return *global_cs;
  };
  auto style_global = [&]() -> const StyleStats& {
    if (!global_ss) global_ss = compute_stats(style, opt.eigen_floor);
    return *global_ss;
  };

  FeatureMap out = content;
  for (const auto& plan : plans) {
    std::optional<StyleStats> local_cs, local_ss;
    if (!plan.content_global) local_cs = compute_stats(content, plan.content, opt.eigen_floor);
    if (plan.style) local_ss = compute_stats(style, *plan.style, opt.eigen_floor);
    if (local_cs && local_cs->eigen.rank() == 0) local_cs.reset();
    if (local_ss && local_ss->eigen.rank() == 0) local_ss.reset();
    const StyleStats& cs = local_cs ? *local_cs : content_global();
    const StyleStats& ss = local_ss ? *local_ss : style_global();
    const Matrix m = coloring_matrix(ss) * whitening_matrix(cs);
    detail::apply_affine(out, content, plan.content, m, cs.mean, ss.mean);
  }
  return detail::blend(out, content, opt.alpha);
}

namespace detail {

struct ChannelMoments {
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline ChannelMoments channel_moments(const FeatureMap& f, const PixelMask& mask) {
  const std::size_t n = mask.size();
  if (n < 2) throw DegenerateRegion("adain: region has fewer than 2 pixels");
  ChannelMoments m{std::vector<double>(f.channels()), std::vector<double>(f.channels())};
  const auto idx = mask.indices();
  for (std::size_t c = 0; c < f.channels(); ++c) {
    const auto plane = f.channel(c);
    double sum = 0.0;
    for (std::size_t p : idx) sum += plane[p];
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t p : idx) ss += (plane[p] - mu) * (plane[p] - mu);
    m.mean[c] = mu;
    m.stddev[c] = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return m;
}

inline void apply_adain(FeatureMap& out, const FeatureMap& content, const PixelMask& mask,
                        const ChannelMoments& cm, const ChannelMoments& sm) {
  for (std::size_t c = 0; c < content.channels(); ++c) {
    const auto src = content.channel(c);
    auto dst = out.channel(c);
    const double scale = sm.stddev[c] / std::max(cm.stddev[c], kStdFloor);
    for (std::size_t p : mask.indices())
      dst[p] = static_cast<float>((src[p] - cm.mean[c]) * scale + sm.mean[c]);
  }
}

}  // namespace detail

/// Per-channel restandardization of content to the style's mean and std.
inline FeatureMap adain(const FeatureMap& content, const FeatureMap& style,
                        const TransformOptions& opt = {}) {
  detail::check_pair(content, style, opt.alpha, "adain");
  if (opt.alpha == 0.0) return content;
  const PixelMask all_c = PixelMask::all(content.plane_size());
  const auto cm = detail::channel_moments(content, all_c);
  const auto sm = detail::channel_moments(style, PixelMask::all(style.plane_size()));
  FeatureMap out = content;
  detail::apply_adain(out, content, all_c, cm, sm);
  return detail::blend(out, content, opt.alpha);
}

inline FeatureMap adain(const FeatureMap& content, const FeatureMap& style,
                        const RegionPairing& seg, const TransformOptions& opt = {}) {
  detail::check_pair(content, style, opt.alpha, "adain");
  if (opt.alpha == 0.0) return content;
  const auto plans = detail::plan_regions(content, style, seg, 2, opt.warn, "adain");
  std::optional<detail::ChannelMoments> gc, gs;
  FeatureMap out = content;
  for (const auto& plan : plans) {
    if (plan.content_global && !gc)
      gc = detail::channel_moments(content, PixelMask::all(content.plane_size()));
    if (!plan.style && !gs)
      gs = detail::channel_moments(style, PixelMask::all(style.plane_size()));
    const auto cm = plan.content_global ? *gc : detail::channel_moments(content, plan.content);
    const auto sm = plan.style ? detail::channel_moments(style, *plan.style) : *gs;
    detail::apply_adain(out, content, plan.content, cm, sm);
  }
  return detail::blend(out, content, opt.alpha);
}

}  // namespace wct2
