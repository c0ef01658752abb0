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

#include "gournet/config.hpp"
#include "gournet/solver.hpp"

namespace gournet {
namespace {

const std::filesystem::path kConfigs = GOURNET_CONFIG_DIR;

std::size_t parse_error_line(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseConfigTest, FirstConvHas896Params) {
  const auto cfg = parse_config(
      "input 224 224 3\n"
      "conv 32 3 3 same relu\n"
      "maxpool 2 2\n"
      "flatten\n"
      "dense 8 softmax\n");
  const auto report = audit(cfg);
  EXPECT_EQ(report.layers[0].params.total, 896u);
  EXPECT_EQ(report.layers[0].output_shape, (Shape{224, 224, 32}));
  EXPECT_EQ(report.layers[2].output_shape, (Shape{112 * 112 * 32}));
}

TEST(ParseConfigTest, CommentsBlankLinesAndWhitespace) {
  const auto cfg = parse_config("# header\n\n  input 8 8 3   # trailing\n\tconv 2 3 3 valid none\nflatten\r\ndense 2 softmax");
  EXPECT_EQ(cfg.layers.size(), 3u);
  EXPECT_EQ(cfg.lines, (std::vector<std::size_t>{4, 5, 6}));
}

TEST(ParseConfigTest, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("conv 32 3 3 same relu\ninput 8 8 3\n"), 1u);
  EXPECT_EQ(parse_error_line(""), 1u);
  EXPECT_EQ(parse_error_line("input 8 8 3\nflatten\ndense 8 relu\n"), 3u);
  EXPECT_EQ(parse_error_line("input 8 8 3\nflatten\nfoo 3\ndense 8 softmax\n"), 3u);
  EXPECT_EQ(parse_error_line("input 8 8 3\nconv 3x 3 3 same relu\nflatten\ndense 8 softmax\n"), 2u);
  EXPECT_EQ(parse_error_line("input 8 8 3\nconv 0 3 3 same relu\nflatten\ndense 8 softmax\n"), 2u);
  EXPECT_EQ(parse_error_line("input 8 8 3\nconv 4 3 3 full relu\nflatten\ndense 8 softmax\n"), 2u);
  EXPECT_EQ(parse_error_line("input 8 8 3\nconv 4 3 3 same\nflatten\ndense 8 softmax\n"), 2u);
  EXPECT_EQ(parse_error_line("input 8 8 3\n\nconv 4 9 9 valid relu\nflatten\ndense 8 softmax\n"), 3u);
  EXPECT_EQ(parse_error_line("input 8 8 3\ndense 4 relu\ndense 8 softmax\n"), 2u);
  EXPECT_EQ(parse_error_line("input 8 8 3\nflatten\ndense 4 softmax\ndense 8 softmax\n"), 3u);
  EXPECT_EQ(parse_error_line("input 8 8 3\ninput 8 8 3\nflatten\ndense 8 softmax\n"), 2u);
  EXPECT_EQ(parse_error_line("input 8 8 3\n"), 1u);
}

TEST(ParseConfigTest, TextRoundTrip) {
  for (const char* name : {"vgg16-8.cfg", "alexnet-bn-8.cfg", "gournet.cfg", "gournet-64.cfg", "tiny-8x8.cfg"}) {
    const auto cfg = load_config(kConfigs / name);
    const auto again = parse_config(to_text(cfg));
    EXPECT_EQ(again.input, cfg.input) << name;
    EXPECT_EQ(again.layers, cfg.layers) << name;
    EXPECT_EQ(to_text(again), to_text(cfg)) << name;
  }
  EXPECT_THROW((void)load_config(kConfigs / "missing.cfg"), ArgumentError);
}

TEST(AuditTest, BundledConfigsMatchPublishedCounts) {
  const auto vgg = audit(load_config(kConfigs / "vgg16-8.cfg")).totals;
  EXPECT_EQ(vgg.total, 134293320u);
  EXPECT_EQ(vgg.trainable, 134293320u);
  const auto alex = audit(load_config(kConfigs / "alexnet-bn-8.cfg")).totals;
  EXPECT_EQ(alex.total, 58319624u);
  EXPECT_EQ(alex.trainable, 58316872u);
  EXPECT_EQ(alex.total - alex.trainable, 2u * (96 + 256 + 384 + 384 + 256));
  const auto gn = audit(load_config(kConfigs / "gournet.cfg")).totals;
  EXPECT_EQ(gn.total, 683656u);
  EXPECT_EQ(gn.trainable, 683656u);
}

TEST(AuditTest, TotalsEqualSumOfRows) {
  for (const char* name : {"vgg16-8.cfg", "alexnet-bn-8.cfg", "gournet.cfg"}) {
    const auto r = audit(load_config(kConfigs / name));
    ParamCount sum;
    for (const auto& row : r.layers) sum += row.params;
    EXPECT_EQ(sum, r.totals) << name;
  }
}

TEST(AuditTest, ReportRendersGroupedTotals) {
  const auto text = render_report(audit(load_config(kConfigs / "vgg16-8.cfg")));
  EXPECT_NE(text.find("Total params: 134,293,320\n"), std::string::npos);
  EXPECT_NE(text.find("Trainable params: 134,293,320\n"), std::string::npos);
  EXPECT_NE(text.find("Non-trainable params: 0\n"), std::string::npos);
  EXPECT_NE(text.find("conv2d_1"), std::string::npos);
  EXPECT_NE(text.find("dense_22"), std::string::npos);
  EXPECT_EQ(format_count(0), "0");
  EXPECT_EQ(format_count(999), "999");
  EXPECT_EQ(format_count(1000), "1,000");
  EXPECT_EQ(format_count(58316872), "58,316,872");
}

// ------------------------------------------------------------------- solver

TEST(SolverTest, TargetBelowMinimumIsEmpty) {
  const auto r = solve_config(1);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_NE(r.log.find("search complete"), std::string::npos);
}

TEST(SolverTest, SingleBlockHandConstructedInstance) {
  SearchFamily fam;
  fam.min_blocks = fam.max_blocks = 1;
  // valid 3x3 on 224 -> 222, pool -> 111; flatten 111*111*32
  const std::uint64_t flat = 111u * 111u * 32u, units = 3;
  const std::uint64_t target = 896 + flat * units + units + 8 * units + 8;
  const auto r = solve_config(target, fam);
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.matches[0], (FamilyMember{{32}, Padding::kValid, 3}));
  EXPECT_EQ(audit(to_config(r.matches[0], fam)).totals.total, target);
}

TEST(SolverTest, RandomMembersRoundTrip) {
  const SearchFamily fam;
  Rng rng(20240607);
  int checked = 0;
  while (checked < 100) {
    FamilyMember m;
    const std::size_t blocks = fam.min_blocks + rng.below(fam.max_blocks - fam.min_blocks + 1);
    m.filters.push_back(fam.first_filters);
    for (std::size_t b = 1; b < blocks; ++b) m.filters.push_back(fam.filter_choices[rng.below(fam.filter_choices.size())]);
    m.padding = fam.paddings[rng.below(fam.paddings.size())];
    m.units = fam.min_units + rng.below(fam.max_units - fam.min_units + 1);
    std::uint64_t target = 0;
    try {
      target = audit(parse_config(to_text(to_config(m, fam)))).totals.total;
    } catch (const ParseError&) {
      continue;  // spatial dims collapse; not a family member
    }
    const auto r = solve_config(target, fam);
    EXPECT_NE(std::find(r.matches.begin(), r.matches.end(), m), r.matches.end()) << "target " << target;
    for (const auto& hit : r.matches) EXPECT_EQ(audit(to_config(hit, fam)).totals.total, target);
    ++checked;
  }
}

TEST(SolverTest, PublishedTargetIncludesShippedConfig) {
  const auto r = solve_config(683656);
  ASSERT_FALSE(r.matches.empty());
  const auto shipped = load_config(kConfigs / "gournet.cfg");
  bool found = false;
  for (const auto& m : r.matches) found |= to_config(m, {}).layers == shipped.layers;
  EXPECT_TRUE(found) << r.log;
}

TEST(SolverTest, DeterministicOrderFewestBlocksFirst) {
  const auto a = solve_config(683656), b = solve_config(683656);
  EXPECT_EQ(a.log, b.log);
  for (std::size_t i = 1; i < a.matches.size(); ++i) {
    EXPECT_LE(a.matches[i - 1].filters.size(), a.matches[i].filters.size());
  }
}

TEST(SolverTest, RejectsBadFamilies) {
  SearchFamily fam;
  fam.min_blocks = 4;
  fam.max_blocks = 3;
  EXPECT_THROW((void)solve_config(10, fam), ArgumentError);
}

}  // namespace
}  // namespace gournet
