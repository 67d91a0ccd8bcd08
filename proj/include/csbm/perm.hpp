#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "csbm/rng.hpp"

namespace csbm {

// A permutation of 0..n-1, stored as its image vector: pi[i] is where
// vertex i goes. Lexicographic comparison is the vector comparison.
using Perm = std::vector<std::uint32_t>;

inline Perm identity_perm(std::uint32_t n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

inline bool is_perm(const Perm& p) {
  std::vector<bool> seen(p.size(), false);
  for (auto x : p) {
    if (x >= p.size() || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

inline void check_perm(const Perm& p, std::uint32_t n) {
  if (p.size() != n || !is_perm(p)) {
    throw std::invalid_argument("expected a permutation of 0.." + std::to_string(n ? n - 1 : 0));
  }
}

inline Perm inverse_perm(const Perm& p) {
  Perm inv(p.size());
  for (std::uint32_t i = 0; i < p.size(); ++i) inv[p[i]] = i;
  return inv;
}

// compose(p, q)[i] = p[q[i]], i.e. apply q first.
inline Perm compose_perm(const Perm& p, const Perm& q) {
  Perm out(p.size());
  for (std::uint32_t i = 0; i < p.size(); ++i) out[i] = p[q[i]];
  return out;
}

inline Perm random_perm(std::uint32_t n, Rng& rng) {
  Perm p = identity_perm(n);
  rng.shuffle(p);
  return p;
}

}  // namespace csbm
