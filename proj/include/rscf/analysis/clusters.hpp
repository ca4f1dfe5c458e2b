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

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "rscf/error.hpp"
#include "rscf/kg/data.hpp"
#include "rscf/model/model.hpp"

namespace rscf {

using Vector = std::vector<double>;

struct Cluster {
  std::string name;
  std::vector<Vector> elements;
};

struct ClusterReport {
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;
  std::vector<double> intra;
  double mean_intra = 0.0;
  // Null when the cluster's summed element norm is zero.
  std::vector<std::optional<double>> inter;
  std::vector<std::size_t> nearest;  // index of the closest other centroid
  std::optional<double> mean_inter;  // over non-null entries
  bool intra_literal_n = false;
};

namespace detail {

inline double l2(const Vector& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double l2_dist(const Vector& a, const Vector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline void check_clusters(const std::vector<Cluster>& clusters) {
  std::size_t dim = 0;
  for (const auto& c : clusters) {
    if (c.elements.empty()) throw InvalidConfig("cluster '" + c.name + "' is empty");
    for (const auto& v : c.elements) {
      if (dim == 0) dim = v.size();
      if (v.size() != dim || dim == 0) throw ShapeMismatch("cluster vectors differ in length");
    }
  }
}

}  // namespace detail

inline Vector centroid(const Cluster& c) {
  Vector out(c.elements.front().size(), 0.0);
  for (const auto& v : c.elements)
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
  for (auto& x : out) x /= static_cast<double>(c.elements.size());
  return out;
}

// Per cluster: mean over elements of ||k_i - C_k|| / ||C_k||, then the mean
// over clusters. With literal_n the per-cluster value is the element sum and
// the overall score divides by the cluster count instead.
inline std::pair<std::vector<double>, double> intra_cluster_distance(
    const std::vector<Cluster>& clusters, bool literal_n = false) {
  detail::check_clusters(clusters);
  if (clusters.empty()) throw InvalidConfig("no clusters");
  std::vector<double> per;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const auto c = centroid(clusters[k]);
    const double cn = detail::l2(c);
    if (cn < 1e-12) throw DegenerateCentroid(k);
    double s = 0;
    for (const auto& v : clusters[k].elements) s += detail::l2_dist(v, c) / cn;
    per.push_back(literal_n ? s : s / static_cast<double>(clusters[k].elements.size()));
  }
  double mean = 0;
  for (double x : per) mean += x;
  return {per, mean / static_cast<double>(per.size())};
}

struct InterResult {
  std::vector<std::optional<double>> per;
  std::vector<std::size_t> nearest;
  std::optional<double> mean;
};

// Per cluster: ||C_k - C_kc|| / sum_i ||k_i|| with C_kc the nearest other
// centroid (lowest index on ties).
inline InterResult inter_cluster_distance(const std::vector<Cluster>& clusters) {
  detail::check_clusters(clusters);
  if (clusters.size() < 2) throw SingleCluster();
  std::vector<Vector> cs;
  for (const auto& c : clusters) cs.push_back(centroid(c));
  InterResult out;
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    std::size_t best = k;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (j == k) continue;
      const double d = detail::l2_dist(cs[k], cs[j]);
      if (d < best_d) best_d = d, best = j;
    }
    double denom = 0;
    for (const auto& v : clusters[k].elements) denom += detail::l2(v);
    out.nearest.push_back(best);
    if (denom > 0) {
      out.per.push_back(best_d / denom);
      sum += best_d / denom;
      ++count;
    } else {
      out.per.push_back(std::nullopt);
    }
  }
  if (count > 0) out.mean = sum / static_cast<double>(count);
  return out;
}

inline ClusterReport cluster_report(const std::vector<Cluster>& clusters, bool literal_n = false) {
  ClusterReport rep;
  rep.intra_literal_n = literal_n;
  for (const auto& c : clusters) {
    rep.names.push_back(c.name);
    rep.sizes.push_back(c.elements.size());
  }
  std::tie(rep.intra, rep.mean_intra) = intra_cluster_distance(clusters, literal_n);
  auto inter = inter_cluster_distance(clusters);
  rep.inter = std::move(inter.per);
  rep.nearest = std::move(inter.nearest);
  rep.mean_inter = inter.mean;
  return rep;
}

inline nlohmann::ordered_json cluster_report_json(const ClusterReport& rep) {
  nlohmann::ordered_json j;
  j["intra_mode"] = rep.intra_literal_n ? "literal-n" : "per-cluster-mean";
  j["mean_intra"] = rep.mean_intra;
  j["mean_inter"] = rep.mean_inter ? nlohmann::ordered_json(*rep.mean_inter) : nullptr;
  auto& cs = j["clusters"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < rep.names.size(); ++k) {
    nlohmann::ordered_json c;
    c["name"] = rep.names[k];
    c["size"] = rep.sizes[k];
    c["intra"] = rep.intra[k];
    c["inter"] = rep.inter[k] ? nlohmann::ordered_json(*rep.inter[k]) : nullptr;
    c["nearest"] = rep.names[rep.nearest[k]];
    cs.push_back(c);
  }
  return j;
}

// CSV rows "cluster,x1,x2,...". A first line starting with "cluster" is a
// header. Clusters keep first-appearance order.
inline std::vector<Cluster> parse_cluster_csv(std::istream& in) {
  std::vector<Cluster> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (lineno == 1 && line.rfind("cluster", 0) == 0) continue;
    std::stringstream ss(line);
    std::string name, cell;
    std::getline(ss, name, ',');
    Vector v;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw MalformedLine(lineno, "not a number: '" + cell + "'");
      }
    }
    if (name.empty() || v.empty()) throw MalformedLine(lineno, "expected cluster,x1,...");
    auto [it, fresh] = index.emplace(name, out.size());
    if (fresh) out.push_back({name, {}});
    out[it->second].elements.push_back(std::move(v));
  }
  return out;
}

inline std::vector<Cluster> load_cluster_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_cluster_csv(in);
}

// One cluster per relation group holding the entity-transformation vectors
// of its relations. Group relations missing from the vocabulary are skipped.
template <typename Real>
std::vector<Cluster> relation_group_clusters(const Model<Real>& model, const Vocabulary& vocab,
                                             const RelationGroups& groups) {
  if (model.filter.kind == FilterKind::None) throw NoFilter();
  std::vector<Cluster> out;
  for (const auto& g : groups.group_names()) {
    Cluster c{g, {}};
    for (const auto& [rel, grp] : groups.group_of) {
      if (grp != g || !vocab.relations.contains(rel)) continue;
      const auto v = model.filter_vector(static_cast<RelationId>(vocab.relations.id(rel)));
      c.elements.emplace_back(v.begin(), v.end());
    }
    if (!c.elements.empty()) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace rscf
