/* Copyright 2026 The RSCF-KGE Authors. All Rights Reserved.

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
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rscf/core/rng.hpp"
#include "rscf/kg/data.hpp"

namespace rscf {
namespace {

std::vector<RawTriple> parse(const std::string& text, TripleFormat fmt = TripleFormat::Tab) {
  std::istringstream in(text);
  return parse_triples(in, fmt);
}

TEST(LoadTriplesTest, SingleTabLine) {
  auto ts = parse("a\tr1\tb\n");
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts[0].head, "a");
  EXPECT_EQ(ts[0].relation, "r1");
  EXPECT_EQ(ts[0].tail, "b");
}

TEST(LoadTriplesTest, TwoFieldsIsMalformedAtLineOne) {
  try {
    parse("a r1\n", TripleFormat::Whitespace);
    FAIL() << "expected MalformedLine";
  } catch (const MalformedLine& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse("a\tr1\n"), MalformedLine);
}

TEST(LoadTriplesTest, ReportsLineNumberOfBadLine) {
  try {
    parse("a\tr\tb\n\nc\tr\n");
    FAIL() << "expected MalformedLine";
  } catch (const MalformedLine& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadTriplesTest, WhitespaceModeAndCrlfAndNoDedup) {
  auto ts = parse("a   r\t b\r\na r b\n", TripleFormat::Whitespace);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0].tail, "b");
  EXPECT_EQ(ts[0], ts[1]);
}

TEST(LoadTriplesTest, MissingFileIsIoError) {
  EXPECT_THROW(load_triples("/nonexistent/file.tsv"), IoError);
}

TEST(LoadTriplesTest, FileRoundTrip) {
  const std::string path = ::testing::TempDir() + "kg_data_test.tsv";
  {
    std::ofstream out(path);
    out << "x\tp\ty\ny\tq\tz\n";
  }
  auto ts = load_triples(path);
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[1].head, "y");
  std::remove(path.c_str());
}

TEST(VocabularyTest, FirstAppearanceOrder) {
  std::vector<RawTriple> train{{"a", "r", "b"}};
  auto v = build_vocabulary(train, {}, {});
  EXPECT_EQ(v.entities.id("a"), 0u);
  EXPECT_EQ(v.entities.id("b"), 1u);
  EXPECT_EQ(v.relations.id("r"), 0u);
  EXPECT_THROW(v.entities.id("zzz"), UnknownName);
}

TEST(VocabularyTest, SpansAllSplitsInOrder) {
  std::vector<RawTriple> train{{"a", "r", "b"}}, valid{{"c", "s", "a"}}, test{{"d", "r", "e"}};
  auto v = build_vocabulary(train, valid, test);
  EXPECT_EQ(v.entities.names(), (std::vector<std::string>{"a", "b", "c", "d", "e"}));
  EXPECT_EQ(v.relations.names(), (std::vector<std::string>{"r", "s"}));
}

TEST(VocabularyTest, SerializedNamesReloadIdentically) {
  std::vector<RawTriple> train{{"a", "r", "b"}, {"q", "s", "a"}};
  auto v = build_vocabulary(train, {}, {});
  Vocabulary w{NameIndex::from_names(v.entities.names()),
               NameIndex::from_names(v.relations.names())};
  EXPECT_EQ(v, w);
  for (const auto& n : v.entities.names()) EXPECT_EQ(v.entities.id(n), w.entities.id(n));
}

TEST(FilterIndexTest, MergesSplits) {
  Dataset d;
  d.vocabulary.entities = NameIndex::from_names({"e0", "e1", "e2"});
  d.vocabulary.relations = NameIndex::from_names({"r0"});
  d.train = {{0, 0, 1}};
  d.valid = {{0, 0, 2}};
  auto idx = build_filter_index(d);
  EXPECT_EQ(idx.true_tails(0, 0), (std::vector<EntityId>{1, 2}));
  EXPECT_EQ(idx.true_heads(0, 2), (std::vector<EntityId>{0}));
}

TEST(FilterIndexTest, EmptyDataset) {
  Dataset d;
  auto idx = build_filter_index(d);
  EXPECT_TRUE(idx.empty());
  EXPECT_TRUE(idx.true_tails(0, 0).empty());
}

TEST(FilterIndexTest, MatchesLinearScanOnRandomKg) {
  Rng rng(21);
  Dataset d;
  std::vector<std::string> ents, rels;
  for (int i = 0; i < 10; ++i) ents.push_back("e" + std::to_string(i));
  for (int i = 0; i < 3; ++i) rels.push_back("r" + std::to_string(i));
  d.vocabulary.entities = NameIndex::from_names(ents);
  d.vocabulary.relations = NameIndex::from_names(rels);
  for (int i = 0; i < 50; ++i) {
    Triple t{static_cast<EntityId>(rng.below(10)), static_cast<RelationId>(rng.below(3)),
             static_cast<EntityId>(rng.below(10))};
    (i % 3 == 0 ? d.train : i % 3 == 1 ? d.valid : d.test).push_back(t);
  }
  auto idx = build_filter_index(d);
  std::vector<Triple> all;
  for (auto s : {Split::Train, Split::Valid, Split::Test})
    all.insert(all.end(), d.split(s).begin(), d.split(s).end());
  for (EntityId h = 0; h < 10; ++h)
    for (RelationId r = 0; r < 3; ++r) {
      std::set<EntityId> scan;
      for (const auto& t : all)
        if (t.head == h && t.relation == r) scan.insert(t.tail);
      EXPECT_EQ(std::vector<EntityId>(scan.begin(), scan.end()), idx.true_tails(h, r));
      std::set<EntityId> scan_heads;
      for (const auto& t : all)
        if (t.relation == r && t.tail == h) scan_heads.insert(t.head);
      EXPECT_EQ(std::vector<EntityId>(scan_heads.begin(), scan_heads.end()),
                idx.true_heads(r, h));
    }
}

TEST(BucketTest, TwentyRelationsTenBuckets) {
  std::vector<Triple> train;
  auto b = relation_frequency_buckets(train, 20, 10);
  ASSERT_EQ(b.bucket_members.size(), 10u);
  for (const auto& m : b.bucket_members) EXPECT_EQ(m.size(), 2u);
}

TEST(BucketTest, FrequencyTiesBrokenById) {
  std::vector<Triple> train;
  for (int i = 0; i < 5; ++i) train.push_back({0, 0, 0});
  for (int i = 0; i < 5; ++i) train.push_back({0, 1, 0});
  train.push_back({0, 2, 0});
  auto b = relation_frequency_buckets(train, 3, 3);
  EXPECT_EQ(b.bucket_members[0], (std::vector<RelationId>{0}));
  EXPECT_EQ(b.bucket_members[1], (std::vector<RelationId>{1}));
  EXPECT_EQ(b.bucket_members[2], (std::vector<RelationId>{2}));
}

TEST(BucketTest, UnevenSplitGivesEarlierBucketsTheExtra) {
  Rng rng(3);
  std::vector<Triple> train;
  for (int i = 0; i < 3000; ++i) train.push_back({0, static_cast<RelationId>(rng.below(237)), 0});
  auto b = relation_frequency_buckets(train, 237, 10);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(b.bucket_members[i].size(), 24u);
  for (std::size_t i = 7; i < 10; ++i) EXPECT_EQ(b.bucket_members[i].size(), 23u);
  // Partition property and descending frequency.
  std::vector<std::size_t> freq(237, 0);
  for (const auto& t : train) ++freq[t.relation];
  std::set<RelationId> seen;
  std::size_t prev = SIZE_MAX;
  for (const auto& m : b.bucket_members)
    for (auto r : m) {
      EXPECT_TRUE(seen.insert(r).second);
      EXPECT_LE(freq[r], prev);
      prev = freq[r];
      EXPECT_EQ(b.bucket_of[r], static_cast<std::size_t>(&m - &b.bucket_members[0]));
    }
  EXPECT_EQ(seen.size(), 237u);
}

TEST(BucketTest, TooFewRelations) {
  EXPECT_THROW(relation_frequency_buckets({}, 5, 10), TooFewRelations);
}

TEST(RelationGroupsTest, ParsesGroupLine) {
  std::istringstream in("people place\t/people/person/place_of_birth\n");
  auto g = parse_relation_groups(in);
  EXPECT_EQ(g.group_of.at("/people/person/place_of_birth"), "people place");
}

TEST(RelationGroupsTest, EmptyFile) {
  std::istringstream in("");
  EXPECT_TRUE(parse_relation_groups(in).group_of.empty());
}

TEST(RelationGroupsTest, DuplicateRelation) {
  std::istringstream in("g1\tr\ng2\tr\n");
  EXPECT_THROW(parse_relation_groups(in), DuplicateRelation);
}

TEST(RelationGroupsTest, Malformed) {
  std::istringstream in("just-one-field\n");
  EXPECT_THROW(parse_relation_groups(in), MalformedLine);
}

TEST(DatasetTest, SplitParsing) {
  EXPECT_EQ(parse_split("test"), Split::Test);
  EXPECT_EQ(parse_split("valid"), Split::Valid);
  EXPECT_THROW(parse_split("dev2"), UsageError);
}

}  // namespace
}  // namespace rscf
