/* Copyright 2026 The AnyProp Authors. All Rights Reserved.

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

#include "anyprop/events.h"

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include "anyprop/status.h"
#include "oracles.h"

namespace anyprop {
namespace {

EventStream ThreeEvents() {
  return EventStream(Dims{4, 4}, {{1, 1, 10, 1}, {2, 1, 20, -1}, {3, 2, 30, 1}});
}

TEST(VoxelizeTest, SplitsBetweenAdjacentBins) {
  // t* = 3 * 5 / 12 = 1.25 in a window [0, 12].
  EventStream stream(Dims{4, 5}, {{3, 2, 5, 1}});
  const VoxelGrid grid = Voxelize(stream, 0, 12, 4);
  for (int b = 0; b < 4; ++b) {
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 5; ++x) {
        double expected = 0.0;
        if (y == 2 && x == 3 && b == 1) expected = 0.75;
        if (y == 2 && x == 3 && b == 2) expected = 0.25;
        EXPECT_EQ(grid.at(b, y, x), expected) << b << " " << y << " " << x;
      }
    }
  }
}

TEST(VoxelizeTest, EmptyStreamGivesZeroGrid) {
  const VoxelGrid grid = Voxelize(EventStream(Dims{3, 3}, {}), 0, 100, 4);
  for (double v : grid.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(grid.bins(), kDefaultBins);
}

TEST(VoxelizeTest, EventAtWindowStartLandsInFirstBin) {
  EventStream stream(Dims{2, 2}, {{1, 0, 100, -1}});
  const VoxelGrid grid = Voxelize(stream, 100, 200, 4);
  EXPECT_EQ(grid.at(0, 0, 1), -1.0);
  EXPECT_EQ(grid.Sum(), -1.0);
}

TEST(VoxelizeTest, EventAtWindowEndLandsInLastBin) {
  EventStream stream(Dims{2, 2}, {{0, 1, 200, 1}});
  const VoxelGrid grid = Voxelize(stream, 100, 200, 4);
  EXPECT_EQ(grid.at(3, 1, 0), 1.0);
  EXPECT_EQ(grid.Sum(), 1.0);
}

TEST(VoxelizeTest, IgnoresEventsOutsideWindow) {
  EventStream stream(Dims{2, 2}, {{0, 0, 5, 1}, {0, 0, 50, 1}, {1, 1, 500, 1}});
  const VoxelGrid grid = Voxelize(stream, 10, 100, 4);
  EXPECT_EQ(grid.Sum(), 1.0);
}

TEST(VoxelizeTest, RejectsBadArguments) {
  const EventStream stream = ThreeEvents();
  EXPECT_THROW(Voxelize(stream, 10, 10, 4), InvalidArgumentError);
  EXPECT_THROW(Voxelize(stream, 10, 5, 4), InvalidArgumentError);
  EXPECT_THROW(Voxelize(stream, 0, 10, 1), InvalidArgumentError);
  EXPECT_THROW(Voxelize(stream, 0, 10, 4, Dims{5, 4}), InvalidArgumentError);
}

TEST(VoxelizeTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> side(1, 32);
  std::uniform_int_distribution<int> count(0, 2000);
  for (int trial = 0; trial < 40; ++trial) {
    const Dims dims{side(rng), side(rng)};
    const EventStream stream =
        testing::RandomStream(rng, dims, count(rng), 0, 99'999);
    const VoxelGrid grid = Voxelize(stream, 1000, 90'000, 4);
    const std::vector<double> expected =
        testing::BruteVoxelize(stream, 1000, 90'000, 4);
    ASSERT_EQ(grid.values().size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      ASSERT_EQ(grid.values()[i], expected[i]) << "trial " << trial << " " << i;
    }
  }
}

TEST(VoxelizeTest, ConservesPolarityMass) {
  std::mt19937_64 rng(12);
  const EventStream stream = testing::RandomStream(rng, Dims{16, 16}, 5000, 0, 1000);
  double total = 0.0;
  for (const Event& e : stream.events()) total += e.p;
  const VoxelGrid grid = Voxelize(stream, 0, 1000, 4);
  EXPECT_NEAR(grid.Sum(), total, 1e-9 * stream.size());
}

TEST(VoxelizeTest, IsLinearInInterleavedStreams) {
  std::mt19937_64 rng(13);
  const Dims dims{12, 9};
  const EventStream a = testing::RandomStream(rng, dims, 700, 0, 5000);
  const EventStream b = testing::RandomStream(rng, dims, 900, 0, 5000);
  std::vector<Event> merged(a.events().begin(), a.events().end());
  merged.insert(merged.end(), b.events().begin(), b.events().end());
  std::stable_sort(merged.begin(), merged.end(),
                   [](const Event& l, const Event& r) { return l.t < r.t; });
  const VoxelGrid both = Voxelize(EventStream(dims, merged), 0, 5000, 4);
  const VoxelGrid va = Voxelize(a, 0, 5000, 4);
  const VoxelGrid vb = Voxelize(b, 0, 5000, 4);
  for (std::size_t i = 0; i < both.values().size(); ++i) {
    EXPECT_NEAR(both.values()[i], va.values()[i] + vb.values()[i], 1e-9);
  }
}

TEST(VoxelizeTest, AdjacentSlicesPartitionTheEvents) {
  std::mt19937_64 rng(14);
  const Dims dims{8, 8};
  const EventStream stream = testing::RandomStream(rng, dims, 3000, 0, 10'000);
  for (TimeUs mid : {0, 1, 2500, 5000, 9999, 10'000}) {
    const EventStream left = Slice(stream, 0, mid);
    const EventStream right = Slice(stream, mid, 10'000);
    const EventStream whole = Slice(stream, 0, 10'000);
    EXPECT_EQ(left.size() + right.size(), whole.size());
    double mass = 0.0;
    if (mid > 0) mass += Voxelize(left, 0, mid, 4).Sum();
    if (mid < 10'000) mass += Voxelize(right, mid, 10'000, 4).Sum();
    EXPECT_NEAR(mass, Voxelize(whole, 0, 10'000, 4).Sum(), 1e-9 * whole.size());
  }
}

TEST(SliceTest, Examples) {
  const EventStream stream = ThreeEvents();
  EXPECT_TRUE(Slice(stream, 20, 20).empty());
  EXPECT_EQ(Slice(stream, 0, 31), stream);
  const EventStream mid = Slice(stream, 15, 30);
  ASSERT_EQ(mid.size(), 1u);
  EXPECT_EQ(mid[0].t, 20);
  EXPECT_EQ(mid.span(), (TimeSpan{15, 30}));
  EXPECT_EQ(stream.size(), 3u);
}

TEST(SliceTest, RejectsReversedWindow) {
  EXPECT_THROW(Slice(ThreeEvents(), 30, 10), InvalidArgumentError);
}

TEST(EventStreamTest, ValidatesInvariants) {
  EXPECT_THROW(EventStream(Dims{2, 2}, {{0, 0, 5, 1}, {0, 0, 4, 1}}),
               FormatError);
  EXPECT_THROW(EventStream(Dims{2, 2}, {{2, 0, 5, 1}}), FormatError);
  EXPECT_THROW(EventStream(Dims{2, 2}, {{0, 0, 5, 0}}), FormatError);
  EXPECT_THROW(EventStream(Dims{2, 2}, {{0, 0, -1, 1}}), FormatError);
}

TEST(EventCodecTest, ReadsCsvRow) {
  std::istringstream in("t_us,x,y,p\n100,5,7,-1\n");
  const EventStream stream = ReadEvents(in, EventFormat::kCsv);
  ASSERT_EQ(stream.size(), 1u);
  EXPECT_EQ(stream[0], (Event{5, 7, 100, -1}));
  EXPECT_EQ(stream.dims(), (Dims{8, 6}));
}

TEST(EventCodecTest, ReadsDimsComment) {
  std::istringstream in("# dims 20 30\nt_us,x,y,p\n1,2,3,1\n");
  EXPECT_EQ(ReadEvents(in, EventFormat::kCsv).dims(), (Dims{20, 30}));
}

TEST(EventCodecTest, RoundTripsBothFormats) {
  std::mt19937_64 rng(15);
  const EventStream stream = testing::RandomStream(rng, Dims{17, 23}, 500, 0, 1 << 30);
  for (EventFormat format : {EventFormat::kCsv, EventFormat::kBinary}) {
    std::stringstream buffer;
    WriteEvents(stream, buffer, format);
    const std::string first = buffer.str();
    const EventStream back = ReadEvents(buffer, format);
    EXPECT_EQ(back, stream);
    std::stringstream again;
    WriteEvents(back, again, format);
    EXPECT_EQ(again.str(), first);
  }
}

int CsvErrorLine(const std::string& text) {
  std::istringstream in(text);
  try {
    ReadEvents(in, EventFormat::kCsv);
  } catch (const ParseError& e) {
    return static_cast<int>(e.location());
  }
  return -1;
}

TEST(EventCodecTest, CsvParseErrorsCarryLineNumbers) {
  EXPECT_EQ(CsvErrorLine("t_us,x,y,p\n100,5,7,0\n"), 2);
  EXPECT_EQ(CsvErrorLine("t_us,x,y,p\n1,1,1,1\n100,5,7\n"), 3);
  EXPECT_EQ(CsvErrorLine("t_us,x,y,p\n1,a,1,1\n"), 2);
  EXPECT_EQ(CsvErrorLine("t,x,y,p\n1,1,1,1\n"), 1);
  EXPECT_EQ(CsvErrorLine("# dims 3\nt_us,x,y,p\n"), 1);
}

TEST(EventCodecTest, CsvRejectsUnsortedAndOutOfBounds) {
  std::istringstream unsorted("t_us,x,y,p\n10,0,0,1\n5,0,0,1\n");
  EXPECT_THROW(ReadEvents(unsorted, EventFormat::kCsv), FormatError);
  std::istringstream outside("# dims 2 2\nt_us,x,y,p\n10,3,0,1\n");
  EXPECT_THROW(ReadEvents(outside, EventFormat::kCsv), std::runtime_error);
}

TEST(EventCodecTest, BinaryErrors) {
  std::stringstream buffer;
  WriteEvents(EventStream(Dims{4, 4}, {{1, 1, 10, 1}, {2, 2, 20, -1}}), buffer,
              EventFormat::kBinary);
  const std::string good = buffer.str();
  ASSERT_EQ(good.size(), 16u + 2 * 14u);

  std::string bad_polarity = good;
  bad_polarity[16 + 14 + 12] = 0;
  std::istringstream in_polarity(bad_polarity);
  try {
    ReadEvents(in_polarity, EventFormat::kBinary);
    ADD_FAILURE() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.location(), 16 + 14);
  }

  std::istringstream truncated(good.substr(0, good.size() - 3));
  EXPECT_THROW(ReadEvents(truncated, EventFormat::kBinary), ParseError);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::istringstream in_magic(bad_magic);
  EXPECT_THROW(ReadEvents(in_magic, EventFormat::kBinary), FormatError);
}

TEST(EventCodecTest, FormatFromExtension) {
  EXPECT_EQ(EventFormatFromPath("a/b.csv"), EventFormat::kCsv);
  EXPECT_EQ(EventFormatFromPath("a/b.bin"), EventFormat::kBinary);
}

}  // namespace
}  // namespace anyprop
