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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>

#include "wct2/image_io.hpp"
#include "wct2/metrics.hpp"
#include "wct2/network.hpp"

namespace wct2 {

/// Size of the image before padding; the unpadded content sits at the
/// top-left of the padded map.
struct CropRecord {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t padded_height = 0;
  std::size_t padded_width = 0;

  bool is_identity() const { return height == padded_height && width == padded_width; }
};

struct PreparedImage {
  FeatureMap features;
  CropRecord crop;
};

inline std::size_t round_up_to(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

/// Bilinear resampling with half-pixel centers.
inline FeatureMap resize_bilinear(const FeatureMap& in, std::size_t h, std::size_t w) {
  detail::require(!in.empty() && h > 0 && w > 0, "resize_bilinear: empty size");
  FeatureMap out(in.channels(), h, w);
  const double sy = static_cast<double>(in.height()) / h, sx = static_cast<double>(in.width()) / w;
  for (std::size_t y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(in.height() - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, in.height() - 1);
    const double ty = fy - y0;
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(in.width() - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, in.width() - 1);
      const double tx = fx - x0;
      for (std::size_t c = 0; c < in.channels(); ++c) {
        const double top = in.at(c, y0, x0) * (1 - tx) + in.at(c, y0, x1) * tx;
        const double bot = in.at(c, y1, x0) * (1 - tx) + in.at(c, y1, x1) * tx;
        out.at(c, y, x) = static_cast<float>(top * (1 - ty) + bot * ty);
      }
    }
  }
  return out;
}

/// Target size after the optional proportional downscale.
inline std::pair<std::size_t, std::size_t> scaled_size(std::size_t h, std::size_t w,
                                                       std::optional<std::size_t> max_side) {
  if (!max_side || std::max(h, w) <= *max_side) return {h, w};
  detail::require(*max_side > 0, "prepare: max side must be positive");
  const double s = static_cast<double>(*max_side) / static_cast<double>(std::max(h, w));
  auto scale = [&](std::size_t v) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(v * s)));
  };
  return {scale(h), scale(w)};
}

namespace detail {

// Mirror index that keeps reflecting for pads longer than the dimension.
inline std::size_t mirror_index(std::size_t i, std::size_t n) {
  if (n == 1) return 0;
  const std::size_t period = 2 * (n - 1);
  const std::size_t r = i % period;
  return r < n ? r : period - r;
}

template <typename T>
std::vector<T> pad_plane(const T* src, std::size_t h, std::size_t w, std::size_t ph,
                         std::size_t pw) {
  std::vector<T> out(ph * pw);
  for (std::size_t y = 0; y < ph; ++y)
    for (std::size_t x = 0; x < pw; ++x)
      out[y * pw + x] = src[mirror_index(y, h) * w + mirror_index(x, w)];
  return out;
}

}  // namespace detail

/// Optional bilinear downscale to max_side, then reflect-pad bottom/right to
/// the next multiple of 8 so three stride-2 poolings divide evenly.
inline PreparedImage prepare(const ImageBuffer& image, std::optional<std::size_t> max_side = {}) {
  if (image.height == 0 || image.width == 0) throw PipelineError("image has a zero dimension");
  FeatureMap f = to_feature_map(image);
  const auto [h, w] = scaled_size(image.height, image.width, max_side);
  if (h != image.height || w != image.width) f = resize_bilinear(f, h, w);
  const std::size_t ph = round_up_to(h, 8), pw = round_up_to(w, 8);
  CropRecord crop{h, w, ph, pw};
  if (crop.is_identity()) return {std::move(f), crop};
  FeatureMap padded(3, ph, pw);
  for (std::size_t c = 0; c < 3; ++c) {
    auto plane = detail::pad_plane(f.channel(c).data(), h, w, ph, pw);
    std::copy(plane.begin(), plane.end(), padded.channel(c).begin());
  }
  return {std::move(padded), crop};
}

/// Brings a label map to the geometry of a prepared image.
inline SegmentationMap prepare_segmentation(const SegmentationMap& seg, const CropRecord& crop) {
  SegmentationMap s = seg;
  if (s.height != crop.height || s.width != crop.width) s = s.resized_nearest(crop.height, crop.width);
  if (crop.is_identity()) return s;
  return SegmentationMap(crop.padded_height, crop.padded_width,
                         detail::pad_plane(s.labels.data(), s.height, s.width, crop.padded_height,
                                           crop.padded_width));
}

inline FeatureMap unprepare(const FeatureMap& f, const CropRecord& crop) {
  detail::require(f.height() == crop.padded_height && f.width() == crop.padded_width,
                  "unprepare: features do not match the crop record");
  if (crop.is_identity()) return f;
  FeatureMap out(f.channels(), crop.height, crop.width);
  for (std::size_t c = 0; c < f.channels(); ++c)
    for (std::size_t y = 0; y < crop.height; ++y)
      for (std::size_t x = 0; x < crop.width; ++x) out.at(c, y, x) = f.at(c, y, x);
  return out;
}

struct StylizeRequest {
  std::filesystem::path content;
  std::filesystem::path style;
  std::optional<std::filesystem::path> content_seg;
  std::optional<std::filesystem::path> style_seg;
  StylizeSchedule schedule;
  std::optional<std::size_t> max_side;
  bool compute_report = false;
  WarningSink warn;
};

struct StylizeOutcome {
  ImageBuffer image;
  std::optional<MetricReport> report;
};

inline MetricReport evaluate(const Model& model, const ImageBuffer& content,
                             const ImageBuffer& style, const ImageBuffer& output) {
  if (content.height != output.height || content.width != output.width)
    throw PipelineError("content and stylized images differ in size");
  MetricReport r;
  r.ssim_edges = ssim(edge_response(to_feature_map(content)), edge_response(to_feature_map(output)));
  r.style = style_loss(prepare(style).features, prepare(output).features, model);
  return r;
}

namespace detail {

inline ImageBuffer read_input(const std::filesystem::path& p, const char* role) {
  if (!std::filesystem::exists(p))
    throw PipelineError(std::string(role) + " image not found: " + p.string());
  return read_image(p);
}

inline SegmentationMap read_seg_input(const std::filesystem::path& p, const char* role,
                                      const ImageBuffer& image) {
  if (!std::filesystem::exists(p))
    throw PipelineError(std::string(role) + " segmentation not found: " + p.string());
  SegmentationMap seg = read_segmentation(p);
  if (seg.height != image.height || seg.width != image.width)
    throw PipelineError(std::string(role) + " segmentation is " + std::to_string(seg.height) +
                        "x" + std::to_string(seg.width) + " but the " + role + " image is " +
                        std::to_string(image.height) + "x" + std::to_string(image.width));
  return seg;
}

}  // namespace detail

/// load -> prepare -> stylize -> crop -> clamp/quantize.
inline StylizeOutcome run_stylize(const Model& model, const StylizeRequest& req) {
  const ImageBuffer content = detail::read_input(req.content, "content");
  const ImageBuffer style = detail::read_input(req.style, "style");
  if (req.content_seg.has_value() != req.style_seg.has_value())
    throw PipelineError("content and style segmentation maps must be given together");

  const PreparedImage pc = prepare(content, req.max_side);
  const PreparedImage ps = prepare(style, req.max_side);
  std::optional<Segmentation> seg;
  if (req.content_seg) {
    const SegmentationMap cs = detail::read_seg_input(*req.content_seg, "content", content);
    const SegmentationMap ss = detail::read_seg_input(*req.style_seg, "style", style);
    seg = Segmentation{prepare_segmentation(cs, pc.crop), prepare_segmentation(ss, ps.crop)};
  }

  const FeatureMap out =
      req.schedule.multi_level
          ? multi_level_stylize(model, pc.features, ps.features, seg, req.schedule, nullptr,
                                req.warn)
          : stylize_forward(model, pc.features, ps.features, seg, req.schedule, nullptr, req.warn);

  StylizeOutcome outcome{to_image_buffer(unprepare(out, pc.crop)), std::nullopt};
  if (req.compute_report) {
    const ImageBuffer content_ref =
        req.max_side ? to_image_buffer(unprepare(pc.features, pc.crop)) : content;
    outcome.report = evaluate(model, content_ref, style, outcome.image);
  }
  return outcome;
}

}  // namespace wct2
