#include <cmath>

#include "doctest.h"

#include "csbm/model.hpp"
#include "csbm/recovery.hpp"
#include "csbm/stats.hpp"

using namespace csbm;

namespace {

Graph two_cliques(Vertex half) {
  Graph g(2 * half);
  for (Vertex u = 0; u < 2 * half; ++u) {
    for (Vertex v = u + 1; v < 2 * half; ++v) {
      if ((u < half) == (v < half)) g.set_edge(u, v, true);
    }
  }
  return g;
}

// Unpruned maximum-likelihood oracle: every k^n labeling in lexicographic
// order, scored through the same (intra edges, intra pairs) integers.
std::vector<std::uint32_t> ml_oracle(const Graph& h, std::uint32_t k, double p, double q) {
  const Vertex n = h.vertex_count();
  const double w_edge = std::log(p / q);
  const double w_gap = std::log((1.0 - q) / (1.0 - p));
  std::vector<std::uint32_t> labels(n, 0), best;
  double best_score = -1e300;
  for (;;) {
    std::int64_t intra_edges = 0, intra_pairs = 0;
    for (Vertex u = 0; u + 1 < n; ++u) {
      for (Vertex v = u + 1; v < n; ++v) {
        if (labels[u] != labels[v]) continue;
        ++intra_pairs;
        intra_edges += h.edge(u, v);
      }
    }
    const double score = w_edge * static_cast<double>(intra_edges) -
                         w_gap * static_cast<double>(intra_pairs - intra_edges);
    if (best.empty() || score > best_score) {
      best_score = score;
      best = labels;
    }
    // Lexicographic increment over k^n labelings.
    Vertex pos = n;
    while (pos > 0 && labels[pos - 1] == k - 1) labels[--pos] = 0;
    if (pos == 0) break;
    ++labels[pos - 1];
  }
  return best;
}

}  // namespace

TEST_SUITE_BEGIN("recovery");

TEST_CASE("union construction covers the degenerate ends") {
  SbmParams params{12, 2, 0.7, 0.2, LabelMode::UniformRandom};
  SUBCASE("s = 1 under the true permutations recovers the parent") {
    const auto inst = make_correlated_instance(params, 1.0, 2, PermMode::UniformRandom, 9);
    const UnionGraph h =
        union_under(inst.perms, inst.copies, params.p, params.q, 1.0);
    CHECK(h.h == inst.parent);
    CHECK(h.effective_p == params.p);
  }
  SUBCASE("an empty second copy leaves the first graph") {
    const auto inst = make_correlated_instance(params, 0.8, 2, PermMode::UniformRandom, 10);
    std::vector<Graph> graphs{inst.copies[0], Graph(12)};
    const UnionGraph h = union_under(inst.perms, graphs, params.p, params.q, 0.8);
    CHECK(h.h == inst.copies[0]);
  }
  SUBCASE("the union is order-invariant under ground-truth alignment") {
    const auto inst = make_correlated_instance(params, 0.6, 3, PermMode::UniformRandom, 11);
    const UnionGraph forward =
        union_under(inst.perms, inst.copies, params.p, params.q, 0.6);
    // Present the copies in reverse order, aligning each with its truth.
    std::vector<Graph> reversed{inst.preimage_copy(2), inst.copies[1], inst.copies[0]};
    std::vector<Perm> perms{inst.perms[0], identity_perm(12)};
    const UnionGraph backward = union_under(perms, reversed, params.p, params.q, 0.6);
    CHECK(forward.h == backward.h);
  }
}

TEST_CASE("union edge frequency matches the effective density") {
  SbmParams params{200, 1, 0.3, 0.0, LabelMode::UniformRandom};
  std::uint64_t pairs = 0, edges = 0;
  for (int i = 0; i < 2; ++i) {
    const auto inst =
        make_correlated_instance(params, 0.5, 2, PermMode::UniformRandom, derive_seed(12, 0, i));
    const UnionGraph h = union_under(inst.perms, inst.copies, params.p, params.q, 0.5);
    pairs += h.h.pair_count();
    edges += h.h.edge_count();
    CHECK(h.effective_p == doctest::Approx(0.225).epsilon(1e-12));
  }
  REQUIRE(pairs >= 10000);
  const double freq = static_cast<double>(edges) / pairs;
  const double se = std::sqrt(0.225 * 0.775 / pairs);
  CHECK(std::abs(freq - 0.225) <= 4.0 * se);
}

TEST_CASE("split weights take their closed-form values") {
  const SplitWeights at_one = SplitWeights::from_subsampling(1.0);
  CHECK(at_one.r11 == 1.0);
  CHECK(at_one.r10 == 0.0);
  const SplitWeights at_half = SplitWeights::from_subsampling(0.5);
  CHECK(at_half.r11 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(at_half.r10 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(at_half.r01 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(SplitWeights::from_subsampling(0.0), std::invalid_argument);
}

TEST_CASE("split patterns are multinomial with the stated weights") {
  Graph h(150);
  for (Vertex u = 0; u < 150; ++u) {
    for (Vertex v = u + 1; v < 150; ++v) h.set_edge(u, v, true);
  }
  Rng rng(13);
  std::vector<std::uint64_t> counts(3, 0);  // (1,1), (1,0), (0,1)
  const double s = 0.5;
  for (int rep = 0; rep < 10; ++rep) {
    const auto [h1, h2] = split_pair(h, s, rng);
    h.for_each_edge([&](Vertex u, Vertex v) {
      const bool in1 = h1.edge(u, v), in2 = h2.edge(u, v);
      CHECK((in1 || in2));  // no H-edge vanishes from both
      if (in1 && in2) ++counts[0];
      else if (in1) ++counts[1];
      else ++counts[2];
    });
  }
  const SplitWeights w = SplitWeights::from_subsampling(s);
  const double stat = chi_square_stat(counts, {w.r11, w.r10, w.r01});
  CHECK(stat < chi_square_crit99(2));
}

TEST_CASE("split then union is the identity on edge sets") {
  SbmParams params{40, 2, 0.5, 0.2, LabelMode::UniformRandom};
  Rng rng(14);
  const auto [h, labels] = sample_sbm(params, rng);
  (void)labels;
  SUBCASE("pairwise split") {
    const auto [h1, h2] = split_pair(h, 0.4, rng);
    std::vector<Graph> graphs{h1, h2};
    const UnionGraph back =
        union_under({identity_perm(40)}, graphs, params.p, params.q, 0.4);
    CHECK(back.h == h);
  }
  SUBCASE("r-wise split") {
    const auto copies = split_r(h, 0.3, 3, rng);
    std::vector<Perm> ids{identity_perm(40), identity_perm(40)};
    const UnionGraph back = union_under(ids, copies, params.p, params.q, 0.3);
    CHECK(back.h == h);
  }
}

TEST_CASE("r-wise split weights match the conditional subsampling law") {
  // Oracle: enumerate r independent Bernoulli(s) keep-decisions for one edge
  // and condition on at least one copy keeping it.
  const double s = 0.6;
  const std::uint32_t r = 3;
  std::vector<double> conditional(1u << r, 0.0);
  double keep_any = 0.0;
  for (std::uint32_t t = 0; t < (1u << r); ++t) {
    double prob = 1.0;
    for (std::uint32_t j = 0; j < r; ++j) prob *= (t >> j) & 1 ? s : 1.0 - s;
    conditional[t] = prob;
    if (t != 0) keep_any += prob;
  }
  CHECK(keep_any == doctest::Approx(1.0 - std::pow(1.0 - s, 3.0)).epsilon(1e-12));

  // Empirical pattern frequencies from split_r against the oracle weights.
  Graph h(120);
  for (Vertex u = 0; u < 120; ++u) {
    for (Vertex v = u + 1; v < 120; ++v) h.set_edge(u, v, true);
  }
  Rng rng(15);
  const auto copies = split_r(h, s, r, rng);
  std::vector<std::uint64_t> counts((1u << r) - 1, 0);
  std::vector<double> expected((1u << r) - 1, 0.0);
  for (std::uint32_t t = 1; t < (1u << r); ++t) expected[t - 1] = conditional[t] / keep_any;
  h.for_each_edge([&](Vertex u, Vertex v) {
    std::uint32_t t = 0;
    for (std::uint32_t j = 0; j < r; ++j) {
      if (copies[j].edge(u, v)) t |= 1u << j;
    }
    REQUIRE(t != 0);
    ++counts[t - 1];
  });
  const double stat = chi_square_stat(counts, expected);
  CHECK(stat < chi_square_crit99(static_cast<int>(counts.size()) - 1));
}

TEST_CASE("exact ML recovery separates ideal instances") {
  SUBCASE("two disjoint cliques at extreme densities") {
    const Graph g = two_cliques(4);
    RecoveryResult result = recover_exact_ml(g, 2, 1.0, 0.0);
    const CommunityLabels truth{{0, 0, 0, 0, 1, 1, 1, 1}, 2};
    score_against(result, truth);
    CHECK(result.exact_success);
    CHECK(result.agreement == 1.0);
  }
  SUBCASE("k = 1 labels everything identically") {
    const Graph g = two_cliques(3);
    RecoveryResult result = recover_exact_ml(g, 1, 0.6, 0.2);
    CHECK(result.sigma_hat.sigma == std::vector<std::uint32_t>(6, 0));
  }
  SUBCASE("size cap and density ordering are enforced") {
    CHECK_THROWS_AS(recover_exact_ml(Graph(15), 2, 0.5, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(recover_exact_ml(Graph(6), 2, 0.2, 0.5), std::invalid_argument);
  }
}

TEST_CASE("exact ML agrees with the unpruned enumeration oracle") {
  Rng rng(16);
  for (int trial = 0; trial < 12; ++trial) {
    SbmParams params{10, 2, 0.7, 0.15, LabelMode::UniformRandom};
    const auto [h, labels] = sample_sbm(params, rng);
    (void)labels;
    const RecoveryResult fast = recover_exact_ml(h, 2, 0.7, 0.15);
    const std::vector<std::uint32_t> slow = ml_oracle(h, 2, 0.7, 0.15);
    CHECK(fast.sigma_hat.sigma == slow);
  }
}

TEST_CASE("exact ML commutes with vertex relabeling") {
  Rng rng(17);
  SbmParams params{9, 2, 0.7, 0.1, LabelMode::UniformRandom};
  const auto [h, labels] = sample_sbm(params, rng);
  (void)labels;
  const RecoveryResult base = recover_exact_ml(h, 2, 0.7, 0.1);
  const Perm pi = random_perm(9, rng);
  const RecoveryResult conjugated = recover_exact_ml(apply_permutation(h, pi), 2, 0.7, 0.1);
  // Pull the conjugated labeling back through pi; compare up to relabeling.
  CommunityLabels pulled;
  pulled.k = 2;
  pulled.sigma.resize(9);
  for (Vertex v = 0; v < 9; ++v) pulled.sigma[v] = conjugated.sigma_hat.sigma[pi[v]];
  CHECK(agreement(pulled, base.sigma_hat) == 1.0);
}

TEST_CASE("spectral recovery nails ideal and deep-regime instances") {
  SUBCASE("two disjoint cliques") {
    const Graph g = two_cliques(20);
    Rng rng(18);
    RecoveryResult result = recover_spectral(g, 2, 4, rng);
    CommunityLabels truth;
    truth.k = 2;
    truth.sigma.assign(20, 0);
    truth.sigma.insert(truth.sigma.end(), 20, 1);
    score_against(result, truth);
    CHECK(result.exact_success);
  }
  SUBCASE("k = 1 is trivially exact") {
    Rng rng(19);
    RecoveryResult result = recover_spectral(two_cliques(5), 1, 2, rng);
    CHECK(result.sigma_hat.sigma == std::vector<std::uint32_t>(10, 0));
  }
  SUBCASE("deep inside the recovery regime the success rate is high") {
    // Effective alpha = 16, beta = 1 at n = 300, k = 2.
    const double m = 150.0;
    SbmParams params{300, 2, 16.0 * std::log(m) / m, std::log(m) / m,
                     LabelMode::FixedBalanced};
    int exact = 0;
    const int trials = 50;
    for (int i = 0; i < trials; ++i) {
      Rng rng(derive_seed(20, 0, i));
      const auto [h, labels] = sample_sbm(params, rng);
      RecoveryResult result = recover_spectral(h, 2, 6, rng);
      score_against(result, labels);
      exact += result.exact_success;
    }
    CHECK(exact >= 45);  // >= 0.9
  }
}

TEST_CASE("agreement maximizes over global relabelings") {
  const CommunityLabels truth{{0, 0, 1, 1}, 2};
  CHECK(agreement(truth, truth) == 1.0);
  CHECK(agreement(CommunityLabels{{1, 1, 0, 0}, 2}, truth) == 1.0);
  CHECK(agreement(CommunityLabels{{0, 1, 1, 1}, 2}, truth) == 0.75);
}

TEST_CASE("pipeline composes matching and recovery") {
  SUBCASE("s = 1 with an exact matcher reduces to recovery on the parent") {
    SbmParams params{10, 2, 0.8, 0.1, LabelMode::FixedBalanced};
    const auto inst = make_correlated_instance(params, 1.0, 2, PermMode::UniformRandom, 21);
    PipelineConfig config;
    config.seed = 77;
    const PipelineResult result =
        two_step_pipeline(inst, MatcherKind::BranchAndBound, RecoveryKind::ExactMl, config);
    CHECK(result.union_graph.h == inst.parent);
    CHECK(result.matches[0].exact);
  }
  SUBCASE("oracle matching recovers the true union") {
    SbmParams params{14, 2, 0.6, 0.2, LabelMode::UniformRandom};
    const auto inst = make_correlated_instance(params, 0.5, 3, PermMode::UniformRandom, 22);
    PipelineConfig config;
    config.seed = 78;
    const PipelineResult result =
        two_step_pipeline(inst, MatcherKind::Oracle, RecoveryKind::ExactMl, config);
    CHECK(result.matched_exactly);
    const UnionGraph truth =
        union_under(inst.perms, inst.copies, params.p, params.q, 0.5);
    CHECK(result.union_graph.h == truth.h);
    CHECK(result.recovery.agreement >= 0.0);
  }
}

TEST_SUITE_END();
