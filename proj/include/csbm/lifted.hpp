#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "csbm/graph.hpp"
#include "csbm/model.hpp"
#include "csbm/perm.hpp"

namespace csbm {

// Maps triangular pair indices back to vertex pairs.
class PairIndexer {
 public:
  explicit PairIndexer(Vertex n);

  Vertex n() const { return n_; }
  std::uint64_t count() const { return pairs_.size(); }
  std::uint64_t index(Vertex u, Vertex v) const { return pair_index(u, v, n_); }
  std::pair<Vertex, Vertex> pair(std::uint64_t idx) const { return pairs_[idx]; }

 private:
  Vertex n_;
  std::vector<std::pair<Vertex, Vertex>> pairs_;
};

// The action of a vertex permutation on unordered pairs:
// tau({i,j}) = {pi(i), pi(j)}.
class LiftedPermutation {
 public:
  LiftedPermutation(Perm base, Vertex n);

  const Perm& base() const { return base_; }
  Vertex n() const { return n_; }

  std::pair<Vertex, Vertex> apply(Vertex i, Vertex j) const {
    Vertex a = base_[i], b = base_[j];
    if (a > b) std::swap(a, b);
    return {a, b};
  }

  std::uint64_t apply_index(std::uint64_t idx, const PairIndexer& indexer) const {
    auto [i, j] = indexer.pair(idx);
    return pair_index(base_[i], base_[j], n_);
  }

  LiftedPermutation compose(const LiftedPermutation& other) const;
  LiftedPermutation inverse() const;

 private:
  Perm base_;
  Vertex n_;
};

LiftedPermutation lift(const Perm& pi);

// Per-community mismatch counts x_r = #{i in V_r : pi(i) != pi*(i)}.
struct MismatchProfile {
  std::vector<std::uint64_t> x;

  std::uint64_t total() const;
};

MismatchProfile mismatch_profile(const CommunityLabels& sigma, const Perm& pi_star,
                                 const Perm& pi);

// Intra-/inter-community pair classes E+(sigma), E-(sigma), as index sets.
struct PairClass {
  std::vector<std::uint64_t> e_plus;
  std::vector<std::uint64_t> e_minus;
};

PairClass pair_classes(const CommunityLabels& sigma);

// All per-permutation alignment statistics of pi measured against the
// ground truth pi_star on graphs (A, B):
//   overlap     = sum_e A_e B_{tau(e)}
//   X           = sum over pairs moved by tau of A_e (B_{tau*(e)} - B_{tau(e)})
//   Y+/Y-       = common-edge counts on moved intra/inter pairs
//   M+/M-       = moved intra/inter pair counts
//   E_tr+/E_tr- = pairs whose endpoints are swapped onto each other's images
//   cycles      = multiset of cycle lengths of tau*^-1 tau over pairs
struct MatchStats {
  std::int64_t overlap = 0;
  std::int64_t x = 0;
  std::int64_t y_plus = 0;
  std::int64_t y_minus = 0;
  std::int64_t m_plus = 0;
  std::int64_t m_minus = 0;
  std::int64_t e_tr_plus = 0;
  std::int64_t e_tr_minus = 0;
  MismatchProfile profile;
  std::vector<std::uint64_t> cycles;
};

MatchStats match_stats(const Graph& a, const Graph& b, const CommunityLabels& sigma,
                       const Perm& pi_star, const Perm& pi);

// Closed-form M+ and M- from the mismatch profile and the transposed-pair
// counts. Throws if either count exceeds its cap of (sum x_r)/2.
std::pair<std::int64_t, std::int64_t> m_counts_closed_form(const CommunityLabels& sigma,
                                                         const MismatchProfile& profile,
                                                         std::int64_t e_tr_plus,
                                                         std::int64_t e_tr_minus);

// Cycle lengths of tau*^-1 tau acting on pair indices, sorted ascending.
// Lengths sum to C(n,2); pairs in 1-cycles are exactly the unmoved pairs.
std::vector<std::uint64_t> cycle_decomposition(const Perm& pi_star, const Perm& pi);

// Cycle-length histogram, for serialization.
std::map<std::uint64_t, std::uint64_t> cycle_histogram(const std::vector<std::uint64_t>& cycles);

}  // namespace csbm
