#include <algorithm>

#include "doctest.h"

#include "csbm/matcher.hpp"
#include "csbm/model.hpp"

using namespace csbm;

namespace {

CorrelatedInstance random_instance(Rng& rng, Vertex n, std::uint32_t k, double s) {
  SbmParams params;
  params.n = n;
  params.k = k;
  params.p = 0.3 + 0.5 * rng.uniform();
  params.q = params.p * rng.uniform();
  params.label_mode = LabelMode::UniformRandom;
  return make_correlated_instance(params, s, 2, PermMode::UniformRandom, rng.next());
}

// All vertex automorphisms of g, by brute force.
std::vector<Perm> automorphisms(const Graph& g) {
  std::vector<Perm> out;
  Perm pi = identity_perm(g.vertex_count());
  do {
    if (overlap(g, g, pi) == static_cast<std::int64_t>(g.edge_count())) out.push_back(pi);
  } while (std::next_permutation(pi.begin(), pi.end()));
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("matcher");

TEST_CASE("overlap counts common pairs") {
  Graph g(4);
  g.set_edge(0, 1, true);
  g.set_edge(1, 2, true);
  g.set_edge(2, 3, true);
  CHECK(overlap(g, g, identity_perm(4)) == 3);
  CHECK(overlap(g, Graph(4), identity_perm(4)) == 0);

  // A = {{0,1},{1,2}}, B = {{0,2}}, pi = (0 1): only pair (1,2) lands on (0,2).
  Graph a(3), b(3);
  a.set_edge(0, 1, true);
  a.set_edge(1, 2, true);
  b.set_edge(0, 2, true);
  CHECK(overlap(a, b, Perm{1, 0, 2}) == 1);
  CHECK_THROWS_AS(overlap(a, g, identity_perm(3)), std::invalid_argument);
}

TEST_CASE("overlap is symmetric under inversion") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_instance(rng, 7, 2, 0.5);
    const Perm pi = random_perm(7, rng);
    CHECK(overlap(inst.copies[0], inst.copies[1], pi) ==
          overlap(inst.copies[1], inst.copies[0], inverse_perm(pi)));
  }
}

TEST_CASE("exhaustive search finds the planted optimum at s = 1") {
  Rng rng(42);
  const auto inst = random_instance(rng, 7, 2, 1.0);
  const MatchResult result = exhaustive_match(inst.copies[0], inst.copies[1]);
  CHECK(result.exact);
  CHECK(result.score == static_cast<std::int64_t>(inst.parent.edge_count()));
  CHECK(overlap(inst.copies[0], inst.copies[1], inst.ground_truth(1)) == result.score);
}

TEST_CASE("exhaustive tie-break on an empty graph returns the identity") {
  const Graph a(5), b(5);
  const MatchResult result = exhaustive_match(a, b, TiePolicy::CollectAll);
  CHECK(result.score == 0);
  CHECK(result.pi_hat == identity_perm(5));
  CHECK(result.maximizer_count == 100);  // capped
  CHECK(result.maximizers.size() == 100);
}

TEST_CASE("exhaustive search refuses beyond its cap") {
  const Graph a(12), b(12);
  CHECK_THROWS_WITH_AS(exhaustive_match(a, b), doctest::Contains("bnb"), std::invalid_argument);
}

TEST_CASE("branch and bound matches exhaustive search on random instances") {
  Rng rng(43);
  for (double s : {0.3, 0.6, 1.0}) {
    for (int trial = 0; trial < 25; ++trial) {
      const Vertex n = 5 + static_cast<Vertex>(rng.below(4));
      const auto inst = random_instance(rng, n, 2, s);
      const MatchResult exhaustive = exhaustive_match(inst.copies[0], inst.copies[1]);
      const MatchResult bnb = bnb_match(inst.copies[0], inst.copies[1]);
      REQUIRE(bnb.exact);
      CHECK(bnb.score == exhaustive.score);
      CHECK(bnb.pi_hat == exhaustive.pi_hat);  // identical lex tie-break
      // The maximizer can only improve on the ground truth.
      const Perm truth = inst.ground_truth(1);
      CHECK(overlap(inst.copies[0], inst.copies[1], truth) -
                overlap(inst.copies[0], inst.copies[1], bnb.pi_hat) <=
            0);
    }
  }
}

TEST_CASE("branch and bound handles the degenerate cases") {
  SUBCASE("A = B keeps the identity among the maximizers at full score") {
    Rng rng(44);
    const auto inst = random_instance(rng, 8, 2, 1.0);
    const Graph& g = inst.parent;
    const MatchResult result = bnb_match(g, g);
    CHECK(result.exact);
    CHECK(result.score == static_cast<std::int64_t>(g.edge_count()));
    CHECK(overlap(g, g, identity_perm(8)) == result.score);
  }
  SUBCASE("empty first graph is exactly solvable with score zero") {
    const Graph a(6);
    Graph b(6);
    b.set_edge(0, 1, true);
    const MatchResult result = bnb_match(a, b);
    CHECK(result.exact);
    CHECK(result.score == 0);
  }
  SUBCASE("an exhausted budget returns the best found, flagged inexact") {
    Rng rng(45);
    const auto inst = random_instance(rng, 10, 2, 0.4);
    const MatchResult result = bnb_match(inst.copies[0], inst.copies[1], 5);
    CHECK_FALSE(result.exact);
    CHECK(result.maximizer_count == 0);  // unknown
    CHECK(overlap(inst.copies[0], inst.copies[1], result.pi_hat) == result.score);
  }
}

TEST_CASE("counted maximizers match an exhaustive tie census") {
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(rng, 6, 2, 0.4);
    const MatchResult exhaustive =
        exhaustive_match(inst.copies[0], inst.copies[1], TiePolicy::CollectAll);
    const MatchResult bnb = bnb_match(inst.copies[0], inst.copies[1], -1, 100);
    if (exhaustive.maximizer_count < 100) {
      CHECK(bnb.maximizer_count == exhaustive.maximizer_count);
    } else {
      CHECK(bnb.maximizer_count == 100);
    }
  }
}

TEST_CASE("local search is monotone and respects its start") {
  Rng rng(47);
  const auto inst = random_instance(rng, 9, 2, 0.6);
  SUBCASE("zero iterations return the start unchanged") {
    std::vector<std::int32_t> seeds(9);
    const Perm start = random_perm(9, rng);
    for (Vertex v = 0; v < 9; ++v) seeds[v] = static_cast<std::int32_t>(start[v]);
    Rng search_rng(1);
    const MatchResult result =
        seeded_local_search(inst.copies[0], inst.copies[1], seeds, 0, search_rng);
    CHECK(result.pi_hat == start);
    CHECK_FALSE(result.exact);
  }
  SUBCASE("score never falls below the start score") {
    Rng search_rng(2);
    const MatchResult result =
        seeded_local_search(inst.copies[0], inst.copies[1], {}, 32, search_rng);
    CHECK(result.score == overlap(inst.copies[0], inst.copies[1], result.pi_hat));
  }
  SUBCASE("seeded at the unique global optimum it stays there") {
    Rng gen(48);
    for (;;) {
      const auto exact_inst = random_instance(gen, 7, 2, 1.0);
      const MatchResult best =
          exhaustive_match(exact_inst.copies[0], exact_inst.copies[1], TiePolicy::CollectAll);
      if (best.maximizer_count != 1) continue;  // want a unique maximizer
      std::vector<std::int32_t> seeds(7);
      const Perm truth = exact_inst.ground_truth(1);
      for (Vertex v = 0; v < 7; ++v) seeds[v] = static_cast<std::int32_t>(truth[v]);
      Rng search_rng(3);
      const MatchResult result =
          seeded_local_search(exact_inst.copies[0], exact_inst.copies[1], seeds, 16, search_rng);
      CHECK(result.pi_hat == truth);
      break;
    }
  }
}

TEST_CASE("isolation report covers the degenerate ends") {
  SUBCASE("empty second graph isolates everything") {
    Rng rng(49);
    const auto inst = random_instance(rng, 8, 2, 0.5);
    const IsolationReport report =
        isolation_report(inst.copies[0], Graph(8), identity_perm(8), inst.sigma);
    CHECK(report.size() == 8);
    CHECK(report.per_community == inst.sigma.sizes());
  }
  SUBCASE("complete parent at s = 1 isolates nothing") {
    Graph k4(4);
    for (Vertex u = 0; u < 4; ++u) {
      for (Vertex v = u + 1; v < 4; ++v) k4.set_edge(u, v, true);
    }
    const CommunityLabels sigma{{0, 0, 1, 1}, 2};
    const IsolationReport report = isolation_report(k4, k4, identity_perm(4), sigma);
    CHECK(report.size() == 0);
    CHECK(report.log_posterior_bound == 0.0);
  }
}

TEST_CASE("two isolated same-community vertices break identifiability") {
  Rng rng(50);
  int found = 0;
  for (int trial = 0; trial < 400 && found < 5; ++trial) {
    const auto inst = random_instance(rng, 8, 2, 0.35);
    const Perm truth = inst.ground_truth(1);
    const IsolationReport report =
        isolation_report(inst.copies[0], inst.copies[1], truth, inst.sigma);
    // Look for two isolated vertices in the same community.
    for (std::size_t i = 0; i + 1 < report.t.size(); ++i) {
      for (std::size_t j = i + 1; j < report.t.size(); ++j) {
        const Vertex u = report.t[i], v = report.t[j];
        if (inst.sigma.sigma[u] != inst.sigma.sigma[v]) continue;
        Perm swapped = truth;
        std::swap(swapped[u], swapped[v]);
        CHECK(overlap(inst.copies[0], inst.copies[1], swapped) ==
              overlap(inst.copies[0], inst.copies[1], truth));
        ++found;
      }
    }
  }
  CHECK(found > 0);
}

TEST_CASE("strict identifiability holds exactly for trivial automorphism groups") {
  Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(rng, 7, 1, 1.0);
    const auto autos = automorphisms(inst.parent);
    const MatchResult result =
        exhaustive_match(inst.copies[0], inst.copies[1], TiePolicy::CollectAll);
    if (autos.size() < 100) {
      CHECK(result.maximizer_count == static_cast<std::int64_t>(autos.size()));
    } else {
      CHECK(result.maximizer_count == 100);
    }
    if (autos.size() == 1) {
      CHECK(result.pi_hat == inst.ground_truth(1));
    }
  }
}

TEST_SUITE_END();
