/*
 * Copyright 2026 The walnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "walnet/util/bytes.hpp"
#include "walnet/util/csv.hpp"
#include "walnet/util/error.hpp"
#include "walnet/util/io.hpp"
#include "walnet/util/keyed_text.hpp"
#include "walnet/util/rng.hpp"

namespace walnet {
namespace {

TEST(KeyedText, RoundTripsValuesInOrder) {
  KeyedText doc;
  doc.set("name", std::string("walnet"));
  doc.set("rate", 0.1);
  doc.set("count", std::int64_t{-3});
  doc.set("seed", std::uint64_t{18446744073709551615ULL});
  const auto back = KeyedText::parse(doc.to_string());
  EXPECT_EQ(back.get_string("name"), "walnet");
  EXPECT_EQ(back.get_double("rate"), 0.1);
  EXPECT_EQ(back.get_int("count"), -3);
  EXPECT_EQ(back.get_uint("seed"), 18446744073709551615ULL);
  ASSERT_EQ(back.entries().size(), 4u);
  EXPECT_EQ(back.entries()[0].first, "name");
  EXPECT_EQ(back.entries()[3].first, "seed");
}

TEST(KeyedText, SkipsCommentsAndBlankLines) {
  const auto doc = KeyedText::parse("# header\n\n  lr = 0.5  \n");
  EXPECT_EQ(doc.get_double("lr"), 0.5);
  EXPECT_EQ(doc.entries().size(), 1u);
}

TEST(KeyedText, MissingAndMalformedKeysThrow) {
  const auto doc = KeyedText::parse("a = x\n");
  EXPECT_THROW(doc.get_string("b"), FormatError);
  EXPECT_THROW(doc.get_double("a"), FormatError);
  EXPECT_EQ(doc.get_int("b", 7), 7);
  EXPECT_THROW(KeyedText::parse("no separator\n"), FormatError);
}

TEST(KeyedText, SetReplacesExistingKey) {
  KeyedText doc;
  doc.set("k", 1);
  doc.set("k", 2);
  EXPECT_EQ(doc.get_int("k"), 2);
  EXPECT_EQ(doc.entries().size(), 1u);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Csv, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::escape("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, ParsesQuotedFieldsAndLineNumbers) {
  const auto rows = csv::parse("h1,h2\r\n\"x,y\",\"multi\nline\"\nz,\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].fields, (csv::Row{"x,y", "multi\nline"}));
  EXPECT_EQ(rows[1].line, 2u);
  EXPECT_EQ(rows[2].fields, (csv::Row{"z", ""}));
  EXPECT_EQ(rows[2].line, 4u);
}

TEST(Csv, RoundTripsThroughFormat) {
  const csv::Row row{"a", "b,c", "\"q\"", ""};
  const auto back = csv::parse(csv::format_row(row) + "\n");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].fields, row);
}

TEST(Bytes, LittleEndianRoundTrip) {
  ByteWriter w;
  w.u32(0x01020304u);
  w.u64(42);
  w.f32(-1.5f);
  w.str("abc");
  const auto bytes = w.take();
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 0x04);
  ByteReader r(bytes, "mem");
  EXPECT_EQ(r.u32(), 0x01020304u);
  EXPECT_EQ(r.u64(), 42u);
  EXPECT_EQ(r.f32(), -1.5f);
  EXPECT_EQ(r.str(), "abc");
  EXPECT_EQ(r.remaining(), 0u);
  EXPECT_THROW(r.u8(), FormatError);
}

TEST(Rng, UniformIndexStaysInRangeAndCoversIt) {
  Rng rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = uniform_index(rng, 7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, StreamsAreReproducible) {
  Rng a(11), b(11);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(uniform01(a), uniform01(b));
  EXPECT_NE(mix_seed(1, 2), mix_seed(1, 3));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 2));
}

TEST(Rng, ShuffleIsAPermutation) {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Rng rng(3);
  shuffle(std::span<int>(v), rng);
  std::set<int> s(v.begin(), v.end());
  EXPECT_EQ(s.size(), 10u);
}

TEST(Io, WriteCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "walnet_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_file(dir / "f.txt", "hello");
  EXPECT_EQ(read_file(dir / "f.txt"), "hello");
  EXPECT_THROW(read_file(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir.parent_path());
}

}  // namespace
}  // namespace walnet
