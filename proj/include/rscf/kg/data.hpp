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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rscf/error.hpp"

namespace rscf {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = t.head;
    h = h * 0x9e3779b97f4a7c15ULL ^ t.relation;
    h = h * 0x9e3779b97f4a7c15ULL ^ t.tail;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

struct RawTriple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const RawTriple&, const RawTriple&) = default;
};

enum class TripleFormat { Tab, Whitespace };

inline TripleFormat parse_triple_format(const std::string& s) {
  if (s == "tab" || s == "tsv") return TripleFormat::Tab;
  if (s == "whitespace" || s == "ws") return TripleFormat::Whitespace;
  throw InvalidConfig("unknown triple format: " + s);
}

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line,
                                             TripleFormat fmt) {
  std::vector<std::string> out;
  if (fmt == TripleFormat::Tab) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find('\t', start);
      out.emplace_back(line.substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }
  std::istringstream is{std::string(line)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline std::string_view strip_eol(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

}  // namespace detail

inline std::vector<RawTriple> parse_triples(std::istream& in,
                                            TripleFormat fmt = TripleFormat::Tab) {
  std::vector<RawTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::strip_eol(line);
    if (detail::is_blank(body)) continue;
    auto fields = detail::split_fields(body, fmt);
    if (fields.size() != 3)
      throw MalformedLine(lineno, "expected 3 fields, got " +
                                      std::to_string(fields.size()));
    out.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  if (in.bad()) throw IoError("read failure");
  return out;
}

inline std::vector<RawTriple> load_triples(const std::string& path,
                                           TripleFormat fmt = TripleFormat::Tab) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_triples(in, fmt);
}

// Bijective name <-> id maps, ids dense in [0, N).
class NameIndex {
 public:
  std::size_t intern(const std::string& name) {
    auto [it, inserted] = ids_.try_emplace(name, names_.size());
    if (inserted) names_.push_back(name);
    return it->second;
  }

  std::size_t id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) throw UnknownName("unknown name: " + name);
    return it->second;
  }

  bool contains(const std::string& name) const { return ids_.count(name) != 0; }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  static NameIndex from_names(const std::vector<std::string>& names) {
    NameIndex idx;
    for (const auto& n : names) {
      if (idx.contains(n)) throw DataError("duplicate name in vocabulary: " + n);
      idx.intern(n);
    }
    return idx;
  }

  friend bool operator==(const NameIndex& a, const NameIndex& b) {
    return a.names_ == b.names_;
  }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
};

struct Vocabulary {
  NameIndex entities;
  NameIndex relations;

  std::size_t num_entities() const { return entities.size(); }
  std::size_t num_relations() const { return relations.size(); }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

// Ids are assigned by first appearance across train, then valid, then test.
inline Vocabulary build_vocabulary(const std::vector<RawTriple>& train,
                                   const std::vector<RawTriple>& valid = {},
                                   const std::vector<RawTriple>& test = {}) {
  Vocabulary v;
  for (const auto* split : {&train, &valid, &test}) {
    for (const auto& t : *split) {
      v.entities.intern(t.head);
      v.relations.intern(t.relation);
      v.entities.intern(t.tail);
    }
  }
  return v;
}

inline std::vector<Triple> encode_triples(const std::vector<RawTriple>& raw,
                                          const Vocabulary& vocab) {
  std::vector<Triple> out;
  out.reserve(raw.size());
  for (const auto& t : raw) {
    out.push_back({static_cast<EntityId>(vocab.entities.id(t.head)),
                   static_cast<RelationId>(vocab.relations.id(t.relation)),
                   static_cast<EntityId>(vocab.entities.id(t.tail))});
  }
  return out;
}

enum class Split { Train, Valid, Test };

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw UsageError("unknown split: " + s);
}

inline std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

struct Dataset {
  Vocabulary vocabulary;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;

  const std::vector<Triple>& split(Split s) const {
    switch (s) {
      case Split::Train: return train;
      case Split::Valid: return valid;
      case Split::Test: return test;
    }
    return test;
  }

  std::size_t num_entities() const { return vocabulary.num_entities(); }
  std::size_t num_relations() const { return vocabulary.num_relations(); }

  // Throws DataError if any id is out of range.
  void validate() const {
    for (const auto* s : {&train, &valid, &test})
      for (const auto& t : *s)
        if (t.head >= num_entities() || t.tail >= num_entities() ||
            t.relation >= num_relations())
          throw DataError("triple id out of vocabulary range");
  }
};

inline Dataset make_dataset(const std::vector<RawTriple>& train,
                            const std::vector<RawTriple>& valid,
                            const std::vector<RawTriple>& test) {
  Dataset d;
  d.vocabulary = build_vocabulary(train, valid, test);
  d.train = encode_triples(train, d.vocabulary);
  d.valid = encode_triples(valid, d.vocabulary);
  d.test = encode_triples(test, d.vocabulary);
  return d;
}

// Encodes the splits against an existing vocabulary (e.g. one restored from a
// checkpoint). Unknown names are a DataError.
inline Dataset make_dataset(const Vocabulary& vocab,
                            const std::vector<RawTriple>& train,
                            const std::vector<RawTriple>& valid,
                            const std::vector<RawTriple>& test) {
  Dataset d;
  d.vocabulary = vocab;
  d.train = encode_triples(train, vocab);
  d.valid = encode_triples(valid, vocab);
  d.test = encode_triples(test, vocab);
  return d;
}

inline Dataset load_dataset(const std::string& train_path,
                            const std::string& valid_path,
                            const std::string& test_path,
                            TripleFormat fmt = TripleFormat::Tab) {
  auto tr = load_triples(train_path, fmt);
  auto va = valid_path.empty() ? std::vector<RawTriple>{} : load_triples(valid_path, fmt);
  auto te = test_path.empty() ? std::vector<RawTriple>{} : load_triples(test_path, fmt);
  return make_dataset(tr, va, te);
}

// True-triple lookup over train + valid + test for filtered ranking.
class FilterIndex {
 public:
  using Set = std::vector<EntityId>;  // sorted, unique

  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  void add(const Triple& t) {
    tails_[key(t.head, t.relation)].push_back(t.tail);
    heads_[key(t.relation, t.tail)].push_back(t.head);
  }

  void finalize() {
    for (auto* m : {&tails_, &heads_})
      for (auto& [k, v] : *m) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
  }

  const Set& true_tails(EntityId head, RelationId rel) const {
    auto it = tails_.find(key(head, rel));
    return it == tails_.end() ? empty_ : it->second;
  }

  const Set& true_heads(RelationId rel, EntityId tail) const {
    auto it = heads_.find(key(rel, tail));
    return it == heads_.end() ? empty_ : it->second;
  }

  bool empty() const { return tails_.empty() && heads_.empty(); }
  std::size_t tail_keys() const { return tails_.size(); }
  std::size_t head_keys() const { return heads_.size(); }

 private:
  std::unordered_map<std::uint64_t, Set> tails_;
  std::unordered_map<std::uint64_t, Set> heads_;
  Set empty_;
};

inline FilterIndex build_filter_index(const Dataset& d) {
  FilterIndex idx;
  for (const auto* s : {&d.train, &d.valid, &d.test})
    for (const auto& t : *s) idx.add(t);
  idx.finalize();
  return idx;
}

struct RelationFrequencyBuckets {
  std::vector<std::size_t> bucket_of;                 // relation id -> bucket
  std::vector<std::vector<RelationId>> bucket_members;
};

// Relations sorted by train frequency (descending, ties by id), cut into k
// contiguous buckets; the first |R| mod k buckets get one extra relation.
// Relations absent from train count with frequency zero.
inline RelationFrequencyBuckets relation_frequency_buckets(
    const std::vector<Triple>& train, std::size_t num_relations,
    std::size_t k = 10) {
  if (k == 0) throw InvalidConfig("bucket count must be >= 1");
  if (num_relations < k) throw TooFewRelations(num_relations, k);
  std::vector<std::size_t> freq(num_relations, 0);
  for (const auto& t : train) ++freq.at(t.relation);
  std::vector<RelationId> order(num_relations);
  std::iota(order.begin(), order.end(), RelationId{0});
  std::stable_sort(order.begin(), order.end(), [&](RelationId a, RelationId b) {
    if (freq[a] != freq[b]) return freq[a] > freq[b];
    return a < b;
  });
  RelationFrequencyBuckets out;
  out.bucket_of.assign(num_relations, 0);
  out.bucket_members.resize(k);
  const std::size_t base = num_relations / k;
  const std::size_t extra = num_relations % k;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i, ++pos) {
      out.bucket_members[b].push_back(order[pos]);
      out.bucket_of[order[pos]] = b;
    }
  }
  return out;
}

struct RelationGroups {
  std::map<std::string, std::string> group_of;  // relation name -> group name

  std::vector<std::string> group_names() const {
    std::vector<std::string> out;
    for (const auto& [rel, g] : group_of)
      if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    std::sort(out.begin(), out.end());
    return out;
  }
};

// Lines of "group-name<TAB>relation-name". Blank lines and '#' comments are
// skipped.
inline RelationGroups parse_relation_groups(std::istream& in) {
  RelationGroups g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::strip_eol(line);
    if (detail::is_blank(body) || body.front() == '#') continue;
    auto fields = detail::split_fields(body, TripleFormat::Tab);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw MalformedLine(lineno, "expected group<TAB>relation");
    if (!g.group_of.emplace(fields[1], fields[0]).second)
      throw DuplicateRelation(fields[1]);
  }
  return g;
}

inline RelationGroups load_relation_groups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_relation_groups(in);
}

}  // namespace rscf
