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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
// usage: acceptance <path to rscf cli>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rscf/rscf.hpp"

namespace fs = std::filesystem;
using namespace rscf;
using Vec = std::vector<double>;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec gaussian_vec(Rng& rng, std::size_t n) {
  Vec v(n);
  for (auto& x : v) x = rng.gaussian();
  return v;
}

double norm(const Vec& v, int p) { return vec::pnorm(std::span<const double>(v), p); }

Vec sub(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec matvec(const Vec& m, const Vec& v) {
  const std::size_t n = v.size();
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += m[i * n + j] * v[j];
  return out;
}

// 1. Analytic gradients agree with central differences on the full grid.
Outcome gradients() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_case;
  const auto grid = objective_gradient_grid(1);
  for (const auto& c : grid) {
    const auto res = check_objective_gradient(c);
    if (!(res.max_relative_error <= worst)) {
      worst = res.max_relative_error;
      worst_case = c.label() + " " + res.worst_table;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 120.0,
          std::to_string(grid.size()) + " cases, max rel err " + fmt("%.3g", worst) + " (" +
              worst_case + "), " + fmt("%.1f", secs) + " s"};
}

// 2. N_p produces unit vectors and flags zero change without NaN.
Outcome normalization() {
  Rng rng(2);
  double worst = 0.0;
  for (int p : {1, 2})
    for (int i = 0; i < 10000; ++i) {
      const auto v = gaussian_vec(rng, 1 + rng.below(64));
      const auto u = p_normalize<double>(v, p, 1e-12);
      worst = std::max(worst, std::abs(norm(u, p) - 1.0));
    }
  bool zero_ok = true;
  for (int p : {1, 2}) {
    const Vec z(16, 0.0);
    bool flagged = false;
    const auto u = p_normalize<double>(z, p, 1e-12, &flagged);
    zero_ok = zero_ok && flagged &&
              std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); });
    const Vec e = gaussian_vec(rng, 16);
    Vec factor(16);
    unit_change<double>(z, p, 1e-12, factor);
    zero_ok = zero_ok && std::all_of(factor.begin(), factor.end(), [](double x) { return x == 1.0; });
  }
  return {worst <= 1e-9 && zero_ok,
          "max | ||N_p(v)||_p - 1 | = " + fmt("%.3g", worst) +
              ", zero vector: " + (zero_ok ? "ZeroChange, identity, finite" : "bad")};
}

// 3. Linear maps keep ratios along a line; adding one keeps distance order.
Outcome linear_and_add_one() {
  Rng rng(3);
  const std::size_t n = 16;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vec m(n * n);
    for (auto& x : m) x = rng.gaussian(0.0, 1.0 / std::sqrt(double(n)));
    const auto a = gaussian_vec(rng, n), b = gaussian_vec(rng, n);
    const double s = rng.uniform(-3.0, 3.0);
    Vec c(n);
    for (std::size_t k = 0; k < n; ++k) c[k] = a[k] + s * (b[k] - a[k]);
    const double before = norm(sub(c, a), 2) / norm(sub(b, a), 2);
    const double after = norm(sub(matvec(m, c), matvec(m, a)), 2) /
                         norm(sub(matvec(m, b), matvec(m, a)), 2);
    worst = std::max(worst, std::abs(after - before) / std::max(1.0, before));
  }
  std::size_t flips = 0;
  for (int i = 0; i < 10000; ++i) {
    auto u = gaussian_vec(rng, n), w = gaussian_vec(rng, n), z = gaussian_vec(rng, n);
    const bool closer = norm(sub(u, w), 2) < norm(sub(u, z), 2);
    for (auto* v : {&u, &w, &z})
      for (auto& x : *v) x += 1.0;
    flips += closer != (norm(sub(u, w), 2) < norm(sub(u, z), 2));
  }
  return {worst <= 1e-9 && flips == 0,
          "collinear ratio max rel err " + fmt("%.3g", worst) + ", add-one order flips " +
              std::to_string(flips) + "/10000"};
}

// 4. Monte Carlo consistency: the transformation and normalization rows
// are nondecreasing in the threshold.
Outcome monte_carlo() {
  ConsistencySimConfig cfg;
  cfg.samples = 10000;
  cfg.dim = 32;
  cfg.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto rep = monte_carlo_consistency(cfg);
  std::cout << "    " << std::string(16, ' ');
  for (const auto& c : rep.columns) std::cout << std::setw(12) << c;
  std::cout << "\n";
  for (std::size_t r = 0; r < 3; ++r) {
    std::cout << "    " << std::left << std::setw(16) << kConsistencyRows[r] << std::right;
    for (std::size_t c = 0; c < rep.columns.size(); ++c)
      std::cout << std::setw(12) << fmt("%.4f", rep.rates[r][c]);
    std::cout << "\n";
  }
  const bool a = monotone_with_slack(rep, 0), b = monotone_with_slack(rep, 1);
  return {a && b, std::string("transformation row ") + (a ? "monotone" : "NOT monotone") +
                      ", normalization row " + (b ? "monotone" : "NOT monotone")};
}

// 5. DURA pushes h toward zero.
Outcome dura_sign() {
  Rng rng(5);
  const auto rep = dura_sign_check(1000, rng);
  return {rep.failures.empty(), std::to_string(rep.failures.size()) + " violations in " +
                                   std::to_string(rep.trials) + " trials"};
}

// 6. The RSCF change on e itself has p-norm ||e^2||_p / ||e||_p.
Outcome bounded_change() {
  Rng rng(6);
  double worst = 0.0;
  for (int p : {1, 2})
    for (int i = 0; i < 1000; ++i) {
      const auto e = gaussian_vec(rng, 1 + rng.below(64));
      const auto u = p_normalize<double>(e, p, 1e-12);
      Vec ue(e.size()), ee(e.size());
      for (std::size_t k = 0; k < e.size(); ++k) {
        ue[k] = u[k] * e[k];
        ee[k] = e[k] * e[k];
      }
      const double lhs = norm(ue, p), rhs = norm(ee, p) / norm(e, p);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
  return {worst <= 1e-9, "max rel err " + fmt("%.3g", worst) + " over 2000 vectors"};
}

double sort_rank(EntityId gold, const std::vector<double>& scores,
                 const std::vector<EntityId>& known) {
  std::vector<double> kept;
  for (EntityId e = 0; e < scores.size(); ++e)
    if (e == gold || !std::binary_search(known.begin(), known.end(), e))
      kept.push_back(scores[e]);
  std::sort(kept.begin(), kept.end(), std::greater<>());
  const auto lo = std::lower_bound(kept.begin(), kept.end(), scores[gold], std::greater<>());
  const auto hi = std::upper_bound(kept.begin(), kept.end(), scores[gold], std::greater<>());
  return (double(lo - kept.begin()) + 1.0 + double(hi - kept.begin())) / 2.0;
}

// 7. Filtered ranks equal a brute-force sort over per-triple scores.
Outcome ranking_oracle() {
  Rng rng(7);
  const ModelKind kinds[] = {ModelKind::TransE, ModelKind::RotatE, ModelKind::ComplEx,
                             ModelKind::CP, ModelKind::Rescal};
  const FilterKind filters[] = {FilterKind::None, FilterKind::SfbrDiag, FilterKind::Rscf,
                                FilterKind::RscfLinear2};
  std::size_t mismatches = 0, queries = 0, tied = 0;
  for (int g = 0; g < 100; ++g) {
    const std::size_t ne = 2 + rng.below(11), nr = 1 + rng.below(4);
    const std::size_t nt = std::max(ne, nr) + rng.below(61 - std::max(ne, nr));
    std::vector<RawTriple> train, test;
    auto en = [](std::size_t i) { return "e" + std::to_string(i); };
    auto rn = [](std::size_t i) { return "r" + std::to_string(i); };
    for (std::size_t i = 0; i < std::max(ne, nr); ++i)
      train.push_back({en(i % ne), rn(i % nr), en((i + 1) % ne)});
    while (train.size() < nt)
      train.push_back({en(rng.below(ne)), rn(rng.below(nr)), en(rng.below(ne))});
    for (std::size_t i = 0, k = 1 + rng.below(8); i < k; ++i)
      test.push_back(train[rng.below(train.size())]);
    const auto d = make_dataset(train, {}, test);
    const auto kind = kinds[g % 5];
    ModelSpec spec;
    spec.kind = kind;
    spec.dim = 6;
    FilterSpec fspec;
    fspec.kind = filters[(g / 5) % 4];
    fspec.rt_enabled = g % 3 == 0;
    fspec.apply_to = is_distance_model(kind) ? ApplyTo::HeadAndTail : ApplyTo::HeadOnly;
    InitConfig init;
    init.scale = 0.5;
    auto m = Model<double>::create(spec, fspec, d.num_entities(), d.num_relations(), init,
                                   1000 + g);
    // Every tenth model scores all candidates equally.
    if (g % 10 == 9)
      for (auto& x : m.params[Table::Entity].flat()) x = 0.0;
    const auto fi = build_filter_index(d);
    const auto rep = evaluate_split(m, d, fi, Split::Test);
    const CandidateScorer<double> scorer(m);
    std::size_t q = 0;
    for (const auto& t : d.test) {
      std::vector<double> tails(d.num_entities()), heads(d.num_entities());
      for (EntityId e = 0; e < d.num_entities(); ++e) {
        tails[e] = scorer.score_triple({t.head, t.relation, e});
        heads[e] = m.reciprocal() ? scorer.score_triple({t.tail, m.inverse(t.relation), e})
                                  : scorer.score_triple({e, t.relation, t.tail});
      }
      const double rt = sort_rank(t.tail, tails, fi.true_tails(t.head, t.relation));
      const double rh = sort_rank(t.head, heads, fi.true_heads(t.relation, t.tail));
      tied += (rt != std::floor(rt)) + (rh != std::floor(rh));
      mismatches += rep.ranks.at(q++).rank != rt;
      mismatches += rep.ranks.at(q++).rank != rh;
    }
    queries += q;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over " +
                               std::to_string(queries) + " queries in 100 KGs (" +
                               std::to_string(tied) + " with ties)"};
}

// 8. Cluster distances on fixtures with known answers.
Outcome clusters() {
  // Centroids (1,0) and (-1,0). Intra: a gives (0.5 + 0.5) / 2, b is exact.
  // Inter for a: |C_a - C_b| = 2 over element norms 1.5 + 0.5.
  const std::vector<Cluster> unit{{"a", {{1.5, 0}, {0.5, 0}}}, {"b", {{-1, 0}, {-1, 0}}}};
  const auto ru = cluster_report(unit);
  double err = std::abs(ru.intra[0] - 0.5) + std::abs(ru.inter[0].value_or(NAN) - 1.0);
  // Centroids (2,0) and (0,5): intra (0.5 + 0.2) / 2, inter sqrt(29) / 4 and
  // sqrt(29) / 10.
  const std::vector<Cluster> fixture{{"a", {{1, 0}, {3, 0}}}, {"b", {{0, 4}, {0, 6}}}};
  const auto rep = cluster_report(fixture);
  err += std::abs(rep.mean_intra - 0.35) +
         std::abs(rep.mean_inter.value_or(NAN) - std::sqrt(29.0) * (0.25 + 0.1) / 2.0);
  std::vector<Cluster> shuffled{{"b", {{0, 6}, {0, 4}}}, {"a", {{3, 0}, {1, 0}}}};
  const auto rp = cluster_report(shuffled);
  const double perm = std::abs(rp.mean_intra - rep.mean_intra) +
                      std::abs(rp.mean_inter.value_or(NAN) - rep.mean_inter.value_or(NAN));
  return {err <= 1e-9 && perm <= 1e-12,
          "fixture error " + fmt("%.3g", err) + ", permutation drift " + fmt("%.3g", perm)};
}

RunConfig load_preset(const std::string& name) {
  return load_run_config(std::string(RSCF_SOURCE_DIR) + "/configs/" + name);
}

// Expected filtered MRR of a uniformly random ranking.
double random_mrr(const Dataset& d) {
  const auto fi = build_filter_index(d);
  double sum = 0.0;
  std::size_t n = 0;
  auto expect = [&](std::size_t candidates) {
    double h = 0.0;
    for (std::size_t k = 1; k <= candidates; ++k) h += 1.0 / double(k);
    sum += h / double(candidates);
    ++n;
  };
  for (const auto& t : d.test) {
    expect(d.num_entities() - fi.true_tails(t.head, t.relation).size() + 1);
    expect(d.num_entities() - fi.true_heads(t.relation, t.tail).size() + 1);
  }
  return sum / double(n);
}

// 9. ComplEx with DURA and RSCF learns the synthetic KG.
Outcome synthetic_learning() {
  const auto t0 = Clock::now();
  auto cfg = load_preset("synthetic-complex-dura-rscf.cfg");
  cfg.train.telemetry.valid_every = 0;
  cfg.train.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto d = load_run_dataset(cfg.data);
  const auto res = train<double>(d, cfg);
  const auto rep = evaluate_split(res.checkpoint.model, d, build_filter_index(d), Split::Test,
                                  Directions::Both, cfg.train.workers);
  const double base = random_mrr(d), secs = seconds_since(t0);
  return {cfg.train.epochs <= 200 && rep.overall.mrr >= 0.5 && rep.overall.mrr >= 5 * base &&
              secs < 300.0,
          "test MRR " + fmt("%.4f", rep.overall.mrr) + " after " +
              std::to_string(cfg.train.epochs) + " epochs, random " + fmt("%.4f", base) +
              ", " + fmt("%.1f", secs) + " s"};
}

// 10. After pretraining under heavy DURA, the SFBR-diagonal scale collapses
// while the RSCF scale stays put.
Outcome concentration() {
  const auto workers = std::max(1u, std::thread::hardware_concurrency());
  auto pre_cfg = load_preset("synthetic-concentration-pretrain.cfg");
  pre_cfg.train.workers = workers;
  const auto d = load_run_dataset(pre_cfg.data);
  const auto pre = train<double>(d, pre_cfg);
  std::string detail;
  bool ok = true;
  for (const char* name : {"synthetic-concentration-plugin-sfbrdiag.cfg",
                           "synthetic-concentration-plugin-rscf.cfg"}) {
    auto cfg = load_preset(name);
    cfg.train.workers = workers;
    const auto sample = sample_triples(d.train, cfg.train.telemetry.scale_sample, cfg.train.seed);
    const auto fresh = make_train_state<double>(d, cfg, &pre.checkpoint);
    const double start = scale_trace(fresh.model, sample).transformation;
    const auto res = train<double>(d, cfg, &pre.checkpoint);
    const double end = res.report.epochs.back().scale->transformation;
    const double ratio = end / start;
    const bool sfbr = cfg.train.filter.kind == FilterKind::SfbrDiag;
    ok = ok && (sfbr ? ratio <= 0.8 : (ratio >= 0.9 && ratio <= 1.1));
    if (!detail.empty()) detail += "; ";
    detail += to_string(cfg.train.filter.kind) + " scale " + fmt("%.4f", start) + " -> " +
              fmt("%.4f", end) + " (x" + fmt("%.3f", ratio) + ")";
  }
  return {ok, detail};
}

// 11. The objective decomposes into task + weighted RP + weighted DURA.
Outcome decomposition() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (const auto& c : objective_gradient_grid(17)) {
    if (c.rp_weight == 0.0) continue;
    auto fx = make_objective_fixture(c);
    auto with = [&](double rp, double dura) {
      LossConfig l = fx.loss;
      l.rp_weight = rp;
      l.dura_weight = dura;
      return total_objective<double>(fx.model, fx.batch, l).total;
    };
    const bool tdm = !is_distance_model(c.model);
    const double base = with(0, 0);
    const double rp_unit = with(1, 0) - base;
    const double dura_unit = tdm ? with(0, 1) - base : 0.0;
    for (double lam : {0.1, 0.5, 2.0})
      for (double dw : tdm ? Vec{0.0, 0.05, 0.3} : Vec{0.0}) {
        const double full = with(lam, dw);
        const double recombined = base + lam * rp_unit + dw * dura_unit;
        worst = std::max(worst, std::abs(full - recombined) / std::max(1.0, std::abs(full)));
        ++cases;
      }
  }
  return {worst <= 1e-9,
          std::to_string(cases) + " weightings, max rel err " + fmt("%.3g", worst)};
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  return std::string(std::istreambuf_iterator<char>(fa), {}) ==
         std::string(std::istreambuf_iterator<char>(fb), {});
}

// 12. Two deterministic CLI runs produce byte-identical artifacts.
Outcome cli_determinism(const std::string& cli) {
  const fs::path work = fs::absolute("acceptance_determinism");
  fs::remove_all(work);
  const std::string cfg = std::string(RSCF_SOURCE_DIR) + "/configs/synthetic-complex-dura-rscf.cfg";
  for (const char* run : {"a", "b"}) {
    const auto dir = (work / run).string();
    const std::string train_cmd = "\"" + cli + "\" train --deterministic --quiet --config \"" +
                                  cfg + "\" --set train.epochs=4 --out \"" + dir + "\"";
    const std::string eval_cmd = "\"" + cli + "\" evaluate --deterministic --checkpoint \"" +
                                 dir + "/checkpoint.rscfckp\" --split test --group-by frequency"
                                 " --out \"" + dir + "\"";
    if (std::system(train_cmd.c_str()) != 0 || std::system(eval_cmd.c_str()) != 0)
      return {false, "cli run failed"};
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(work / "a")) {
    ++compared;
    differing += !same_bytes(entry.path(), work / "b" / entry.path().filename());
  }
  return {compared >= 6 && differing == 0,
          std::to_string(differing) + " of " + std::to_string(compared) + " artifacts differ"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <rscf cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient-correctness", gradients},
      {"normalization-unit-norm", normalization},
      {"linear-and-add-one-invariance", linear_and_add_one},
      {"consistency-monotonicity", monte_carlo},
      {"dura-sign", dura_sign},
      {"bounded-change-identity", bounded_change},
      {"ranking-oracle", ranking_oracle},
      {"cluster-fixtures", clusters},
      {"synthetic-learning", synthetic_learning},
      {"concentration-dynamics", concentration},
      {"objective-decomposition", decomposition},
      {"cli-determinism", [&] { return cli_determinism(cli); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << " " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
