#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "csbm/graph.hpp"
#include "csbm/matcher.hpp"
#include "csbm/model.hpp"
#include "csbm/perm.hpp"
#include "csbm/rng.hpp"

namespace csbm {

// Union graph H of aligned copies. With the ground-truth permutations and r
// copies, H is an SBM at the inflated densities p (1-(1-s)^r), q (1-(1-s)^r).
struct UnionGraph {
  Graph h;
  double effective_p = 0.0;
  double effective_q = 0.0;
  std::uint32_t r = 0;
};

// (i,j) is an edge of H iff it is an edge of graphs[0] or (pi(i), pi(j)) is
// an edge of graphs[t] under pi = pi_list[t-1], for some t >= 1.
UnionGraph union_under(const std::vector<Perm>& pi_list, const std::vector<Graph>& graphs,
                       double p, double q, double s);

// Conditional pattern probabilities of an H-edge under the pairwise split.
struct SplitWeights {
  double r11 = 0.0;
  double r10 = 0.0;
  double r01 = 0.0;

  static SplitWeights from_subsampling(double s);
};

// Splits H into two graphs so that (H1, H2', sigma_H) with H drawn at the
// effective densities matches the law of directly generated correlated
// copies: non-edges of H vanish from both, edges get pattern (1,1), (1,0) or
// (0,1) with the SplitWeights.
std::pair<Graph, Graph> split_pair(const Graph& h, double s, Rng& rng);

// r-wise generalization: each H-edge receives a nonzero membership pattern
// t in {0,1}^r with probability s^|t| (1-s)^(r-|t|) / (1 - (1-s)^r).
std::vector<Graph> split_r(const Graph& h, double s, std::uint32_t r, Rng& rng);

struct RecoveryResult {
  CommunityLabels sigma_hat;
  double agreement = -1.0;  // unset until scored against a ground truth
  bool exact_success = false;
  std::string method;
  bool converged = true;
};

// Exact maximum-likelihood labeling by enumeration over canonical label
// vectors (first-use order), n <= 14. Ties go to the lexicographically
// smallest labeling. Requires p_eff > q_eff.
RecoveryResult recover_exact_ml(const Graph& h, std::uint32_t k, double p_eff, double q_eff);

// Top-k adjacency eigenvectors by shifted power iteration with deflation,
// then seeded k-means on the embedding rows; the best intra-cluster
// objective over the restarts wins. Non-convergence of the eigensolver is
// flagged, not fatal.
RecoveryResult recover_spectral(const Graph& h, std::uint32_t k, int restarts, Rng& rng);

// Fraction of correctly labeled vertices maximized over global label
// bijections (optimal assignment on the k x k confusion matrix).
double agreement(const CommunityLabels& sigma_hat, const CommunityLabels& sigma);

// Fills result.agreement / exact_success against the ground truth.
void score_against(RecoveryResult& result, const CommunityLabels& sigma);

enum class MatcherKind { Exhaustive, BranchAndBound, LocalSearch, Oracle };
enum class RecoveryKind { ExactMl, Spectral };

struct PipelineConfig {
  std::int64_t budget = -1;
  Vertex exhaustive_cap = 10;
  int local_iters = 64;
  int spectral_restarts = 8;
  std::uint64_t seed = 0;
};

struct PipelineResult {
  std::vector<MatchResult> matches;  // one per copy j >= 1, in order
  bool matched_exactly = false;      // every pi_hat equals its ground truth
  UnionGraph union_graph;
  RecoveryResult recovery;
};

// Match-then-cluster: estimate the alignment of every copy against copy 0,
// build the union graph under the estimated permutations, and recover the
// communities from it.
PipelineResult two_step_pipeline(const CorrelatedInstance& instance, MatcherKind matcher,
                                 RecoveryKind recovery, const PipelineConfig& config = {});

}  // namespace csbm
