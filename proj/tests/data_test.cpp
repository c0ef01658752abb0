/* Copyright 2026 The GourNet-CPP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "gournet/data.hpp"

namespace gournet {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("gournet_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void touch_image(const fs::path& p, float v = 128.0f) {
  fs::create_directories(p.parent_path());
  save_ppm(Image({2, 2, 3}, v), p);
}

Dataset synthetic_counts(const std::vector<std::size_t>& per_class) {
  Dataset ds;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    ds.class_names.push_back("class" + std::to_string(c));
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      ds.samples.push_back({ds.class_names.back() + "/img" + std::to_string(i), static_cast<int>(c)});
    }
  }
  return ds;
}

TEST(ScanTest, LexicographicClassesAndSortedFiles) {
  TempDir dir;
  touch_image(dir.path() / "b" / "2.ppm");
  touch_image(dir.path() / "b" / "10.ppm");
  touch_image(dir.path() / "a" / "x.ppm");
  const auto ds = scan_dataset(dir.path());
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.samples, (std::vector<Sample>{{"a/x.ppm", 0}, {"b/10.ppm", 1}, {"b/2.ppm", 1}}));
}

TEST(ScanTest, SingleFolderSingleFile) {
  TempDir dir;
  touch_image(dir.path() / "only" / "one.ppm");
  const auto ds = scan_dataset(dir.path());
  EXPECT_EQ(ds.class_names.size(), 1u);
  EXPECT_EQ(ds.samples.size(), 1u);
}

TEST(ScanTest, UndecodableFilesSkippedWithWarning) {
  TempDir dir;
  touch_image(dir.path() / "a" / "good.ppm");
  std::ofstream(dir.path() / "a" / "bad.jpg") << "garbage";
  const auto ds = scan_dataset(dir.path());
  EXPECT_EQ(ds.samples.size(), 1u);
  EXPECT_EQ(ds.report.skipped, 1u);
  ASSERT_EQ(ds.report.warnings.size(), 1u);
  EXPECT_NE(ds.report.warnings[0].find("bad.jpg"), std::string::npos);
}

TEST(ScanTest, EmptyOrMissingRootIsDataError) {
  TempDir dir;
  EXPECT_THROW((void)scan_dataset(dir.path()), DataError);
  EXPECT_THROW((void)scan_dataset(dir.path() / "missing"), DataError);
}

TEST(ScanTest, EightClassCorpusWithOneLargerClass) {
  TempDir dir;
  // small-scale version of a 500/501 layout; counting logic is size-agnostic
  for (int c = 0; c < 8; ++c)
    for (int i = 0; i < (c == 3 ? 6 : 5); ++i) touch_image(dir.path() / ("c" + std::to_string(c)) / (std::to_string(i) + ".ppm"));
  const auto ds = scan_dataset(dir.path(), false);
  EXPECT_EQ(ds.class_names.size(), 8u);
  EXPECT_EQ(ds.samples.size(), 41u);
}

TEST(SplitTest, FiveHundredAndFiveHundredOne) {
  const auto m = stratified_split(synthetic_counts({500, 501}), 42);
  const auto c = m.counts();
  EXPECT_EQ(c[0], (std::array<std::size_t, 3>{400, 50, 50}));
  EXPECT_EQ(c[1], (std::array<std::size_t, 3>{401, 50, 50}));
}

TEST(SplitTest, TinyClassGoesEntirelyToTrain) {
  const auto c = stratified_split(synthetic_counts({9}), 1).counts();
  EXPECT_EQ(c[0], (std::array<std::size_t, 3>{9, 0, 0}));
}

TEST(SplitTest, FloorRuleAcrossSizes) {
  for (std::size_t n : {1, 10, 19, 20, 99, 100, 101, 250}) {
    const auto c = stratified_split(synthetic_counts({n}), 7).counts()[0];
    EXPECT_EQ(c[1], n / 10);
    EXPECT_EQ(c[2], n / 10);
    EXPECT_EQ(c[0] + c[1] + c[2], n);
  }
}

TEST(SplitTest, SplitsPartitionTheCorpus) {
  const auto ds = synthetic_counts({500, 501, 37, 120, 12, 9, 500, 500});
  const auto m = stratified_split(ds, 2026);
  std::multiset<std::string> all;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest})
    for (auto i : m.members(s)) all.insert(m.samples[i].path);
  std::multiset<std::string> expect;
  for (const auto& s : ds.samples) expect.insert(s.path);
  EXPECT_EQ(all, expect);
  EXPECT_EQ(std::set<std::string>(all.begin(), all.end()).size(), all.size());
}

TEST(SplitTest, SameSeedByteIdenticalDifferentSeedDiffers) {
  const auto ds = synthetic_counts({500, 501, 500});
  EXPECT_EQ(manifest_text(stratified_split(ds, 5)), manifest_text(stratified_split(ds, 5)));
  EXPECT_NE(manifest_text(stratified_split(ds, 5)), manifest_text(stratified_split(ds, 6)));
}

TEST(SplitTest, ShuffleDependsOnlyOnClassMembers) {
  // adding another class must not disturb the assignment of existing ones
  const auto a = stratified_split(synthetic_counts({100, 50}), 3);
  const auto b = stratified_split(synthetic_counts({100, 50, 70}), 3);
  for (std::size_t i = 0; i < 150; ++i) EXPECT_EQ(a.assignment[i], b.assignment[i]);
}

TEST(ManifestTest, RoundTripsThroughText) {
  auto ds = synthetic_counts({30, 12});
  ds.samples[3].path = "class0/with,comma \"quoted\".ppm";
  const auto m = stratified_split(ds, 9);
  const auto text = manifest_text(m);
  EXPECT_EQ(text.rfind("path,class,split\n", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto back = parse_manifest(text);
  EXPECT_EQ(back.class_names, m.class_names);
  EXPECT_EQ(back.samples, m.samples);
  EXPECT_EQ(back.assignment, m.assignment);
  EXPECT_EQ(manifest_text(back), text);
}

TEST(ManifestTest, FileRoundTripAndErrors) {
  TempDir dir;
  const auto m = stratified_split(synthetic_counts({20}), 1);
  write_manifest(m, dir.path() / "split.csv");
  EXPECT_EQ(read_manifest(dir.path() / "split.csv").assignment, m.assignment);
  EXPECT_THROW((void)parse_manifest("wrong,header\n"), DataError);
  EXPECT_THROW((void)parse_manifest("path,class,split\na/b.ppm,a,holdout\n"), DataError);
  EXPECT_THROW((void)parse_manifest("path,class,split\na/b.ppm,a\n"), DataError);
  EXPECT_THROW((void)read_manifest(dir.path() / "missing.csv"), DataError);
}

TEST(BatchTest, PartialFinalBatchKept) {
  std::vector<std::size_t> idx(10);
  std::iota(idx.begin(), idx.end(), 0);
  const auto b = plan_batches(idx, 4, false, 0, 0);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].size(), 4u);
  EXPECT_EQ(b[1].size(), 4u);
  EXPECT_EQ(b[2].size(), 2u);
  std::vector<std::size_t> flat;
  for (const auto& x : b) flat.insert(flat.end(), x.begin(), x.end());
  EXPECT_EQ(flat, idx);
  EXPECT_THROW((void)plan_batches(idx, 0, false, 0, 0), ArgumentError);
}

TEST(BatchTest, ShuffledEpochsReplayAndVisitEverySampleOnce) {
  std::vector<std::size_t> idx(37);
  std::iota(idx.begin(), idx.end(), 100);
  const auto e1 = plan_batches(idx, 8, true, 42, 1);
  EXPECT_EQ(e1, plan_batches(idx, 8, true, 42, 1));
  EXPECT_NE(e1, plan_batches(idx, 8, true, 42, 2));
  EXPECT_NE(e1, plan_batches(idx, 8, true, 43, 1));
  std::vector<std::size_t> flat;
  for (const auto& x : e1) flat.insert(flat.end(), x.begin(), x.end());
  std::sort(flat.begin(), flat.end());
  EXPECT_EQ(flat, idx);
}

TEST(ImageSourceTest, ResizesRescalesCachesAndLogs) {
  TempDir dir;
  touch_image(dir.path() / "a" / "x.ppm", 51.0f);
  ImageSource src(dir.path(), 5, 3);
  const auto& img = src.get("a/x.ppm");
  EXPECT_EQ(img.shape(), (Shape{5, 3, 3}));
  for (float v : img.data()) EXPECT_NEAR(v, 0.2f, 1e-6);
  EXPECT_EQ(&src.get("a/x.ppm"), &img);
  EXPECT_EQ(src.access_log(), (std::set<std::string>{"a/x.ppm"}));
}

}  // namespace
}  // namespace gournet
