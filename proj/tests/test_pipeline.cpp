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
#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "wct2/pipeline.hpp"

using namespace wct2;
namespace fs = std::filesystem;

namespace {

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wct2_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path path(const std::string& leaf) const { return dir_ / leaf; }

  fs::path dir_;
};

ImageBuffer random_buffer(std::uint64_t seed, std::size_t h, std::size_t w) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  ImageBuffer img(h, w);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

// Smooth gradient; survives JPEG compression with small error.
ImageBuffer gradient_buffer(std::size_t h, std::size_t w) {
  ImageBuffer img(h, w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      img.at(y, x, 0) = static_cast<std::uint8_t>(255 * x / (w - 1));
      img.at(y, x, 1) = static_cast<std::uint8_t>(255 * y / (h - 1));
      img.at(y, x, 2) = 128;
    }
  return img;
}

void write_jpeg(const fs::path& p, const ImageBuffer& img) {
  FILE* f = std::fopen(p.string().c_str(), "wb");
  ASSERT_NE(f, nullptr);
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 95, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(img.rgb.data() + cinfo.next_scanline * img.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

const Model& small_model() {
  static const Model m =
      build_model(make_synthetic_weights(9, UnpoolMode::sum), {UnpoolMode::sum, PoolingKind::haar});
  return m;
}

}  // namespace

TEST(Prepare, MultipleOfEightIsUntouched) {
  const ImageBuffer img = random_buffer(1, 64, 64);
  const PreparedImage p = prepare(img);
  EXPECT_TRUE(p.crop.is_identity());
  EXPECT_EQ(to_image_buffer(p.features), img);
}

TEST(Prepare, PadsBottomRightByMirroring) {
  const ImageBuffer img = random_buffer(2, 65, 70);
  const PreparedImage p = prepare(img);
  EXPECT_EQ(p.features.height(), 72u);
  EXPECT_EQ(p.features.width(), 72u);
  EXPECT_EQ(p.crop.height, 65u);
  EXPECT_EQ(p.crop.width, 70u);
  const FeatureMap f = to_feature_map(img);
  for (std::size_t c = 0; c < 3; ++c)
    for (long y = 0; y < 72; ++y)
      for (long x = 0; x < 72; ++x)
        ASSERT_EQ(p.features.at(c, y, x), f.at(c, oracle::reflect(y, 65), oracle::reflect(x, 70)));
  EXPECT_EQ(to_image_buffer(unprepare(p.features, p.crop)), img);
}

TEST(Prepare, PadsTinyImagesPeriodically) {
  const ImageBuffer img = random_buffer(3, 1, 3);
  const PreparedImage p = prepare(img);
  EXPECT_EQ(p.features.height(), 8u);
  EXPECT_EQ(p.features.width(), 8u);
  // Width 3 mirrors with period 4: 0 1 2 1 0 1 2 1.
  const std::size_t expect[8] = {0, 1, 2, 1, 0, 1, 2, 1};
  for (std::size_t x = 0; x < 8; ++x)
    EXPECT_EQ(p.features.at(0, 5, x), p.features.at(0, 0, expect[x]));
}

TEST(Prepare, MaxSideDownscales) {
  const ImageBuffer img = gradient_buffer(100, 50);
  const PreparedImage p = prepare(img, 40);
  EXPECT_EQ(p.crop.height, 40u);
  EXPECT_EQ(p.crop.width, 20u);
  EXPECT_EQ(p.features.width(), 24u);
  EXPECT_TRUE(prepare(img, 200).crop.height == 100u);
}

TEST(Resize, ConstantStaysConstantAndIdentityIsExact) {
  const FeatureMap c(3, 9, 7, 0.25f);
  const FeatureMap resized = resize_bilinear(c, 4, 13);
  for (float v : resized.values()) EXPECT_NEAR(v, 0.25f, 1e-7);
  std::mt19937_64 rng(4);
  const FeatureMap r = oracle::random_map(rng, 2, 6, 5);
  EXPECT_EQ(resize_bilinear(r, 6, 5), r);
}

TEST(Quantize, ClampsAndMapsNanToZero) {
  FeatureMap f(3, 1, 2, std::vector<float>{-0.5f, 2.0f, std::numeric_limits<float>::quiet_NaN(),
                                           0.5f, 1.0f, 0.0f});
  const ImageBuffer img = to_image_buffer(f);
  EXPECT_EQ(img.at(0, 0, 0), 0);
  EXPECT_EQ(img.at(0, 1, 0), 255);
  EXPECT_EQ(img.at(0, 0, 1), 0);
  EXPECT_EQ(img.at(0, 1, 1), 128);
}

TEST(Pipeline, PlumbingAlphaZeroRoundTripIsExact) {
  const ImageBuffer img = random_buffer(5, 37, 29);
  const PreparedImage p = prepare(img);
  StylizeSchedule sched;
  sched.alpha = 0.0;
  const Model m = Model::plumbing(PoolingKind::haar);
  const FeatureMap out = stylize_forward(m, p.features, p.features, std::nullopt, sched);
  EXPECT_EQ(to_image_buffer(unprepare(out, p.crop)), img);
}

TEST_F(PipelineTest, PngRoundTrip) {
  const ImageBuffer img = random_buffer(6, 11, 13);
  write_png(path("a.png"), img);
  EXPECT_EQ(read_image(path("a.png")), img);
}

TEST_F(PipelineTest, JpegIsDecoded) {
  const ImageBuffer img = gradient_buffer(16, 24);
  write_jpeg(path("a.jpg"), img);
  const ImageBuffer back = read_image(path("a.jpg"));
  ASSERT_EQ(back.height, 16u);
  ASSERT_EQ(back.width, 24u);
  int worst = 0;
  for (std::size_t i = 0; i < img.rgb.size(); ++i)
    worst = std::max(worst, std::abs(int(img.rgb[i]) - int(back.rgb[i])));
  EXPECT_LT(worst, 24);
}

TEST_F(PipelineTest, UnknownFormatAndCorruptPng) {
  {
    std::FILE* f = std::fopen(path("x.png").string().c_str(), "wb");
    std::fputs("hello", f);
    std::fclose(f);
  }
  EXPECT_THROW(read_image(path("x.png")), PipelineError);
  {
    std::FILE* f = std::fopen(path("y.png").string().c_str(), "wb");
    const unsigned char sig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n', 0, 0};
    std::fwrite(sig, 1, sizeof sig, f);
    std::fclose(f);
  }
  EXPECT_THROW(read_image(path("y.png")), PipelineError);
}

TEST_F(PipelineTest, SegmentationRoundTripAndGrayCheck) {
  std::vector<std::int32_t> labels(6 * 5);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::int32_t>(i % 3) * 40;
  const SegmentationMap seg(6, 5, labels);
  write_segmentation(path("s.png"), seg);
  const SegmentationMap back = read_segmentation(path("s.png"));
  EXPECT_EQ(back.labels, labels);
  ImageBuffer colored(2, 2);
  colored.at(0, 0, 0) = 10;
  write_png(path("c.png"), colored);
  EXPECT_THROW(read_segmentation(path("c.png")), PipelineError);
}

TEST(PrepareSegmentation, FollowsImageGeometry) {
  std::vector<std::int32_t> labels(10 * 10);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = (i % 10) < 5 ? 1 : 2;
  const SegmentationMap seg(10, 10, labels);
  const CropRecord crop{10, 10, 16, 16};
  const SegmentationMap p = prepare_segmentation(seg, crop);
  EXPECT_EQ(p.height, 16u);
  EXPECT_EQ(p.label_set(), (std::set<std::int32_t>{1, 2}));
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x)
      EXPECT_EQ(p.at(y, x), seg.at(oracle::reflect(y, 10), oracle::reflect(x, 10)));
}

TEST_F(PipelineTest, RunStylizeErrorsNameTheProblem) {
  write_png(path("c.png"), random_buffer(7, 16, 16));
  StylizeRequest req;
  req.content = path("c.png");
  req.style = path("missing.png");
  try {
    run_stylize(small_model(), req);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_NE(std::string(e.what()).find("style image not found"), std::string::npos);
  }
  req.style = path("c.png");
  write_segmentation(path("seg_small.png"), SegmentationMap(8, 8, std::vector<std::int32_t>(64)));
  req.content_seg = path("seg_small.png");
  req.style_seg = path("seg_small.png");
  try {
    run_stylize(small_model(), req);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_NE(std::string(e.what()).find("content segmentation is 8x8"), std::string::npos);
  }
  req.style_seg.reset();
  EXPECT_THROW(run_stylize(small_model(), req), PipelineError);
}

TEST_F(PipelineTest, RunStylizeIsDeterministicAndKeepsSize) {
  write_png(path("c.png"), random_buffer(8, 21, 27));
  write_png(path("s.png"), random_buffer(9, 30, 18));
  StylizeRequest req;
  req.content = path("c.png");
  req.style = path("s.png");
  req.compute_report = true;
  const auto a = run_stylize(small_model(), req);
  const auto b = run_stylize(small_model(), req);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.image.height, 21u);
  EXPECT_EQ(a.image.width, 27u);
  ASSERT_TRUE(a.report);
  EXPECT_GE(a.report->ssim_edges, -1.0);
  EXPECT_LE(a.report->ssim_edges, 1.0);
  EXPECT_GE(a.report->style.total, 0.0);
}

TEST_F(PipelineTest, RunStylizeWithSegmentation) {
  write_png(path("c.png"), random_buffer(10, 24, 24));
  write_png(path("s.png"), random_buffer(11, 24, 24));
  std::vector<std::int32_t> cl(24 * 24), sl(24 * 24);
  for (std::size_t i = 0; i < cl.size(); ++i) {
    cl[i] = (i % 24) < 12 ? 1 : 2;
    sl[i] = (i / 24) < 12 ? 1 : 3;
  }
  write_segmentation(path("cs.png"), SegmentationMap(24, 24, cl));
  write_segmentation(path("ss.png"), SegmentationMap(24, 24, sl));
  StylizeRequest req;
  req.content = path("c.png");
  req.style = path("s.png");
  req.content_seg = path("cs.png");
  req.style_seg = path("ss.png");
  std::vector<std::string> warnings;
  req.warn = [&](const std::string& m) { warnings.push_back(m); };
  const auto out = run_stylize(small_model(), req);
  EXPECT_EQ(out.image.height, 24u);
  EXPECT_FALSE(warnings.empty());
  EXPECT_NE(warnings.front().find("label 2"), std::string::npos);
}
