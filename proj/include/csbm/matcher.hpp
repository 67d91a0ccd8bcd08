#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "csbm/graph.hpp"
#include "csbm/lifted.hpp"
#include "csbm/model.hpp"
#include "csbm/perm.hpp"
#include "csbm/rng.hpp"

namespace csbm {

enum class TiePolicy { Lex, CollectAll };

struct MatchResult {
  Perm pi_hat;
  std::int64_t score = 0;
  // Number of optimal permutations found, capped; 0 means unknown (budget ran
  // out before the tie count completed).
  std::int64_t maximizer_count = 0;
  bool exact = false;
  double elapsed_ms = 0.0;
  std::int64_t nodes = 0;
  std::vector<Perm> maximizers;  // filled under TiePolicy::CollectAll, capped
  std::optional<MatchStats> stats;
};

// Alignment objective: number of pairs that are edges in A and whose
// pi-image is an edge in B.
std::int64_t overlap(const Graph& a, const Graph& b, const Perm& pi);

// True argmax by enumeration of all n! permutations in lexicographic order.
// Refuses n above the cap; use bnb_match beyond factorial reach.
MatchResult exhaustive_match(const Graph& a, const Graph& b, TiePolicy tie = TiePolicy::Lex,
                             Vertex cap = 10);

// Exact depth-first solver with an admissible bound. budget < 0 means
// unlimited; the unit is node expansions, so results are reproducible at any
// thread count. If the budget runs out the best permutation found so far is
// returned with exact=false. Ties are resolved to the lexicographically
// smallest maximizer and counted up to maximizer_cap.
MatchResult bnb_match(const Graph& a, const Graph& b, std::int64_t budget = -1,
                      std::int64_t maximizer_cap = 100, TiePolicy tie = TiePolicy::Lex);

// Hill climbing over transpositions from a seeded or random start. seeds maps
// vertices to images (-1 for free vertices). The reported score never
// decreases across iterations; exact is always false.
MatchResult seeded_local_search(const Graph& a, const Graph& b,
                                const std::vector<std::int32_t>& seeds, int iters, Rng& rng);

// Vertices with no common edge under alignment pi, split by community.
// log_posterior_bound is log prod_r 1/|T_r|!, the cap on the posterior mass
// of any single permutation given the labels.
struct IsolationReport {
  std::vector<Vertex> t;
  std::vector<std::uint32_t> per_community;
  double log_posterior_bound = 0.0;

  std::size_t size() const { return t.size(); }
};

IsolationReport isolation_report(const Graph& a, const Graph& b, const Perm& pi,
                                 const CommunityLabels& sigma);

// Fills result.stats against the supplied ground truth.
void attach_ground_truth_stats(MatchResult& result, const Graph& a, const Graph& b,
                               const CommunityLabels& sigma, const Perm& pi_star);

}  // namespace csbm
