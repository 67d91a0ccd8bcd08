#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csbm/graph.hpp"
#include "csbm/perm.hpp"
#include "csbm/rng.hpp"

namespace csbm {

enum class LabelMode { UniformRandom, FixedBalanced };

// Planted-partition parameters: k communities, intra-pair edge probability p,
// inter-pair probability q <= p.
struct SbmParams {
  std::uint32_t n = 0;
  std::uint32_t k = 1;
  double p = 0.0;
  double q = 0.0;
  LabelMode label_mode = LabelMode::UniformRandom;

  void validate() const;
};

// Log-scaled parametrization: p = alpha*log(m)/m, q = beta*log(m)/m with
// community size m = n/k. Conversion refuses probabilities above one rather
// than clamping, since clamping would silently move the thresholds.
struct ScaledParams {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint32_t k = 1;
  std::uint32_t n = 0;
  double s = 1.0;
  std::uint32_t r = 2;

  double community_size() const;  // m = n/k, requires k | n
  SbmParams to_sbm(LabelMode mode = LabelMode::FixedBalanced) const;
};

struct CommunityLabels {
  std::vector<std::uint32_t> sigma;
  std::uint32_t k = 1;

  std::uint32_t n() const { return static_cast<std::uint32_t>(sigma.size()); }
  std::vector<std::uint32_t> sizes() const;
};

// True when every community size is within (1 +- eps/2) * n/k.
bool balanced_within(const CommunityLabels& labels, double eps);

// Deterministic balanced labeling: the first (n mod k) communities get
// ceil(n/k) vertices, assigned in contiguous blocks.
CommunityLabels balanced_labels(std::uint32_t n, std::uint32_t k);

CommunityLabels sample_labels(const SbmParams& params, Rng& rng);

// Samples the edges of an SBM given a labeling: each intra pair is an edge
// independently with probability p, each inter pair with probability q.
Graph sample_sbm_edges(const SbmParams& params, const CommunityLabels& labels, Rng& rng);

std::pair<Graph, CommunityLabels> sample_sbm(const SbmParams& params, Rng& rng);

// Keeps each edge of the parent independently with probability s.
Graph subsample(const Graph& parent, double s, Rng& rng);

// Relabels vertices: the output has edge (pi(i), pi(j)) iff the input has
// edge (i, j).
Graph apply_permutation(const Graph& g, const Perm& pi);

enum class PermMode { UniformRandom, Identity, Given };

// One sampled world: a parent SBM graph, r independent subsampled copies,
// and the hidden permutations applied to copies 2..r. copies[0] keeps the
// identity; perms[j-1] is the ground-truth permutation of copies[j].
struct CorrelatedInstance {
  SbmParams params;
  Graph parent;
  CommunityLabels sigma;
  std::vector<Graph> copies;
  std::vector<Perm> perms;
  double s = 1.0;
  std::uint64_t seed = 0;
  bool conditioned_on_balanced = false;
  double balance_eps = 0.0;

  std::uint32_t r() const { return static_cast<std::uint32_t>(copies.size()); }

  // Ground-truth permutation of copy j (identity for j = 0).
  Perm ground_truth(std::uint32_t j) const;

  // The pre-permutation copy G'_j, i.e. copies[j] pulled back to parent order.
  Graph preimage_copy(std::uint32_t j) const;
};

// Samples a full correlated instance from a master seed. Sub-streams for the
// labels, the parent, each copy and each permutation are derived by counter,
// so generation is deterministic under any execution order. When
// condition_balance_eps > 0, labels are redrawn until the balancedness event
// holds (uniform mode only).
CorrelatedInstance make_correlated_instance(const SbmParams& params, double s, std::uint32_t r,
                                            PermMode perm_mode, std::uint64_t seed,
                                            const std::vector<Perm>* given_perms = nullptr,
                                            double condition_balance_eps = 0.0);

CorrelatedInstance make_correlated_instance(const ScaledParams& scaled, PermMode perm_mode,
                                            std::uint64_t seed,
                                            const std::vector<Perm>* given_perms = nullptr,
                                            double condition_balance_eps = 0.0);

}  // namespace csbm
