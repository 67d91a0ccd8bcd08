#include "csbm/matcher.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace csbm {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Branch-and-bound search state over adjacency bitmasks (n <= 64).
struct BnbSearch {
  Vertex n;
  std::vector<std::uint64_t> adj_a;
  std::vector<std::uint64_t> adj_b;
  std::vector<Vertex> order;          // A-side assignment order
  std::vector<std::uint64_t> nbr_images;  // per A-vertex: images of assigned A-neighbors
  std::uint64_t assigned_mask = 0;    // A side
  std::uint64_t used_mask = 0;        // B side
  std::int64_t realized = 0;
  std::int64_t nodes = 0;
  std::int64_t budget = -1;
  bool aborted = false;

  BnbSearch(const Graph& a, const Graph& b)
      : n(a.vertex_count()), adj_a(n, 0), adj_b(n, 0), nbr_images(n, 0) {
    a.for_each_edge([&](Vertex u, Vertex v) {
      adj_a[u] |= 1ull << v;
      adj_a[v] |= 1ull << u;
    });
    b.for_each_edge([&](Vertex u, Vertex v) {
      adj_b[u] |= 1ull << v;
      adj_b[v] |= 1ull << u;
    });
    order.resize(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](Vertex x, Vertex y) { return a.degree(x) > a.degree(y); });
  }

  bool tick() {
    ++nodes;
    if (budget >= 0 && nodes > budget) aborted = true;
    return !aborted;
  }

  // Admissible upper bound on the final overlap reachable from this node:
  // realized common edges, plus for every assigned vertex the smaller of its
  // open A-degree and its image's open B-degree (edges into the unassigned
  // region), plus the smaller of the free A- and B-edge counts (edges fully
  // inside the unassigned region, each consuming two endpoint slots).
  std::int64_t bound() const {
    const std::uint64_t open_a = ~assigned_mask;
    const std::uint64_t open_b = ~used_mask;
    std::uint64_t free_a2 = 0, free_b2 = 0;
    for (Vertex d = 0; d < n; ++d) {
      const std::uint64_t bit = 1ull << d;
      if (!(assigned_mask & bit)) free_a2 += std::popcount(adj_a[d] & open_a);
      if (!(used_mask & bit)) free_b2 += std::popcount(adj_b[d] & open_b);
    }
    std::int64_t cross = 0;
    std::uint64_t m = assigned_mask;
    while (m) {
      const int u = std::countr_zero(m);
      m &= m - 1;
      const std::int64_t ca = std::popcount(adj_a[u] & open_a);
      const std::int64_t cb = std::popcount(adj_b[image_by_vertex[u]] & open_b);
      cross += std::min(ca, cb);
    }
    return realized + cross + static_cast<std::int64_t>(std::min(free_a2, free_b2) / 2);
  }

  std::vector<Vertex> image_by_vertex;  // valid for assigned vertices

  void init_assignment() { image_by_vertex.assign(n, 0); }

  void assign(Vertex u, Vertex w) {
    image_by_vertex[u] = w;
    assigned_mask |= 1ull << u;
    used_mask |= 1ull << w;
    realized += std::popcount(adj_b[w] & nbr_images[u]);
    std::uint64_t open_nbrs = adj_a[u] & ~assigned_mask;
    while (open_nbrs) {
      const int v = std::countr_zero(open_nbrs);
      open_nbrs &= open_nbrs - 1;
      nbr_images[v] |= 1ull << w;
    }
  }

  void unassign(Vertex u, Vertex w) {
    std::uint64_t open_nbrs = adj_a[u] & ~assigned_mask;
    while (open_nbrs) {
      const int v = std::countr_zero(open_nbrs);
      open_nbrs &= open_nbrs - 1;
      nbr_images[v] &= ~(1ull << w);
    }
    realized -= std::popcount(adj_b[w] & nbr_images[u]);
    assigned_mask &= ~(1ull << u);
    used_mask &= ~(1ull << w);
  }

  Perm current_perm() const {
    Perm pi(n);
    for (Vertex v = 0; v < n; ++v) pi[v] = image_by_vertex[v];
    return pi;
  }
};

// Phase 1: optimal score. Keeps the first incumbent found at each strict
// improvement; children are ordered by immediate gain, then image index.
void bnb_optimize(BnbSearch& s, Vertex depth, std::int64_t& best, Perm& incumbent) {
  if (s.aborted) return;
  if (depth == s.n) {
    if (s.realized > best) {
      best = s.realized;
      incumbent = s.current_perm();
    }
    return;
  }
  const Vertex u = s.order[depth];
  std::vector<std::pair<std::int64_t, Vertex>> children;
  children.reserve(s.n - depth);
  std::uint64_t open = ~s.used_mask & ((s.n == 64) ? ~0ull : ((1ull << s.n) - 1));
  while (open) {
    const int w = std::countr_zero(open);
    open &= open - 1;
    const std::int64_t gain = std::popcount(s.adj_b[w] & s.nbr_images[u]);
    children.emplace_back(-gain, static_cast<Vertex>(w));
  }
  std::sort(children.begin(), children.end());
  for (auto [neg_gain, w] : children) {
    (void)neg_gain;
    if (!s.tick()) return;
    s.assign(u, w);
    if (s.bound() > best) {
      bnb_optimize(s, depth + 1, best, incumbent);
    }
    s.unassign(u, w);
    if (s.aborted) return;
  }
}

// Phase 2: count maximizers (capped); every leaf reached under the
// bound >= best prune scores exactly best.
void bnb_count(BnbSearch& s, Vertex depth, std::int64_t best, std::int64_t cap,
               std::int64_t& count, Perm& first_found, std::vector<Perm>* collect) {
  if (s.aborted || count >= cap) return;
  if (depth == s.n) {
    if (count == 0) first_found = s.current_perm();
    if (collect && static_cast<std::int64_t>(collect->size()) < cap) {
      collect->push_back(s.current_perm());
    }
    ++count;
    return;
  }
  const Vertex u = s.order[depth];
  std::uint64_t open = ~s.used_mask & ((s.n == 64) ? ~0ull : ((1ull << s.n) - 1));
  while (open) {
    const int w = std::countr_zero(open);
    open &= open - 1;
    if (!s.tick()) return;
    s.assign(u, static_cast<Vertex>(w));
    if (s.bound() >= best) {
      bnb_count(s, depth + 1, best, cap, count, first_found, collect);
    }
    s.unassign(u, static_cast<Vertex>(w));
    if (s.aborted || count >= cap) return;
  }
}

// Phase 3: lexicographically smallest maximizer. Identity vertex order with
// ascending images visits complete permutations in lexicographic order, so
// the first leaf that survives the bound >= best prune is the answer.
bool bnb_lex_min(BnbSearch& s, Vertex depth, std::int64_t best, Perm& out) {
  if (s.aborted) return false;
  if (depth == s.n) {
    out = s.current_perm();
    return true;
  }
  const Vertex u = depth;  // identity order
  for (Vertex w = 0; w < s.n; ++w) {
    if (s.used_mask & (1ull << w)) continue;
    if (!s.tick()) return false;
    s.assign(u, w);
    if (s.bound() >= best && bnb_lex_min(s, depth + 1, best, out)) {
      s.unassign(u, w);
      return true;
    }
    s.unassign(u, w);
    if (s.aborted) return false;
  }
  return false;
}

}  // namespace

std::int64_t overlap(const Graph& a, const Graph& b, const Perm& pi) {
  if (a.vertex_count() != b.vertex_count()) {
    throw std::invalid_argument("overlap: dimension mismatch");
  }
  check_perm(pi, a.vertex_count());
  std::int64_t count = 0;
  a.for_each_edge([&](Vertex u, Vertex v) {
    if (b.edge(pi[u], pi[v])) ++count;
  });
  return count;
}

MatchResult exhaustive_match(const Graph& a, const Graph& b, TiePolicy tie, Vertex cap) {
  const auto start = Clock::now();
  const Vertex n = a.vertex_count();
  if (b.vertex_count() != n) throw std::invalid_argument("exhaustive_match: dimension mismatch");
  if (n > cap) {
    throw std::invalid_argument("exhaustive_match: n=" + std::to_string(n) + " exceeds cap " +
                                std::to_string(cap) + "; use bnb_match for larger instances");
  }
  constexpr std::int64_t kMaximizerCap = 100;

  MatchResult result;
  Perm pi = identity_perm(n);
  std::int64_t best = -1;
  do {
    const std::int64_t score = overlap(a, b, pi);
    if (score > best) {
      best = score;
      result.pi_hat = pi;
      result.maximizer_count = 1;
      if (tie == TiePolicy::CollectAll) result.maximizers.assign(1, pi);
    } else if (score == best) {
      if (result.maximizer_count < kMaximizerCap) ++result.maximizer_count;
      if (tie == TiePolicy::CollectAll &&
          static_cast<std::int64_t>(result.maximizers.size()) < kMaximizerCap) {
        result.maximizers.push_back(pi);
      }
    }
  } while (std::next_permutation(pi.begin(), pi.end()));

  result.score = best;
  result.exact = true;
  result.elapsed_ms = ms_since(start);
  return result;
}

MatchResult bnb_match(const Graph& a, const Graph& b, std::int64_t budget,
                      std::int64_t maximizer_cap, TiePolicy tie) {
  const auto start = Clock::now();
  const Vertex n = a.vertex_count();
  if (b.vertex_count() != n) throw std::invalid_argument("bnb_match: dimension mismatch");
  if (n > 64) throw std::invalid_argument("bnb_match: n > 64 not supported");
  if (maximizer_cap < 2) maximizer_cap = 2;

  MatchResult result;
  if (n == 0) {
    result.exact = true;
    result.maximizer_count = 1;
    return result;
  }

  BnbSearch search(a, b);
  search.budget = budget;
  search.init_assignment();

  std::int64_t best = -1;
  Perm incumbent;
  bnb_optimize(search, 0, best, incumbent);
  if (best < 0) {
    // Budget ran out before any complete assignment; report the identity.
    incumbent = identity_perm(n);
    best = overlap(a, b, incumbent);
  }
  result.score = best;
  result.pi_hat = incumbent;
  result.nodes = search.nodes;
  if (search.aborted) {
    result.exact = false;
    result.maximizer_count = 0;
    result.elapsed_ms = ms_since(start);
    return result;
  }

  std::int64_t count = 0;
  Perm first_found;
  std::vector<Perm> collected;
  bnb_count(search, 0, best, maximizer_cap, count, first_found,
            tie == TiePolicy::CollectAll ? &collected : nullptr);
  result.nodes = search.nodes;
  if (search.aborted) {
    result.exact = false;
    result.maximizer_count = 0;
    result.elapsed_ms = ms_since(start);
    return result;
  }
  result.maximizer_count = count;

  if (count == 1) {
    result.pi_hat = first_found;
  } else {
    Perm lex_min;
    if (bnb_lex_min(search, 0, best, lex_min)) {
      result.pi_hat = lex_min;
    }
    if (search.aborted) {
      result.exact = false;
      result.elapsed_ms = ms_since(start);
      result.nodes = search.nodes;
      return result;
    }
  }
  if (tie == TiePolicy::CollectAll) {
    std::sort(collected.begin(), collected.end());
    result.maximizers = std::move(collected);
  }
  result.nodes = search.nodes;
  result.exact = true;
  result.elapsed_ms = ms_since(start);
  return result;
}

MatchResult seeded_local_search(const Graph& a, const Graph& b,
                                const std::vector<std::int32_t>& seeds, int iters, Rng& rng) {
  const auto start = Clock::now();
  const Vertex n = a.vertex_count();
  if (b.vertex_count() != n) {
    throw std::invalid_argument("seeded_local_search: dimension mismatch");
  }
  if (!seeds.empty() && seeds.size() != n) {
    throw std::invalid_argument("seeded_local_search: seed map must have length n");
  }

  // Build the start permutation: honor the seed map, fill the rest randomly.
  Perm pi(n);
  std::vector<bool> used(n, false);
  std::vector<Vertex> free_vertices;
  for (Vertex v = 0; v < n; ++v) {
    const std::int32_t img = seeds.empty() ? -1 : seeds[v];
    if (img < 0) {
      free_vertices.push_back(v);
      continue;
    }
    if (static_cast<Vertex>(img) >= n || used[img]) {
      throw std::invalid_argument("seeded_local_search: seed map is not injective into range");
    }
    pi[v] = static_cast<Vertex>(img);
    used[img] = true;
  }
  std::vector<Vertex> free_images;
  for (Vertex w = 0; w < n; ++w) {
    if (!used[w]) free_images.push_back(w);
  }
  rng.shuffle(free_images);
  for (std::size_t i = 0; i < free_vertices.size(); ++i) pi[free_vertices[i]] = free_images[i];

  std::int64_t score = overlap(a, b, pi);

  const auto swap_delta = [&](Vertex u, Vertex v) {
    std::int64_t before = 0, after = 0;
    const Vertex pu = pi[u], pv = pi[v];
    for (Vertex w = 0; w < n; ++w) {
      if (w == u || w == v) continue;
      const Vertex pw = pi[w];
      if (a.edge(u, w)) {
        before += b.edge(pu, pw);
        after += b.edge(pv, pw);
      }
      if (a.edge(v, w)) {
        before += b.edge(pv, pw);
        after += b.edge(pu, pw);
      }
    }
    return after - before;
  };

  std::vector<std::pair<Vertex, Vertex>> candidates;
  for (Vertex u = 0; u + 1 < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) candidates.emplace_back(u, v);
  }

  for (int sweep = 0; sweep < iters; ++sweep) {
    rng.shuffle(candidates);
    bool improved = false;
    for (auto [u, v] : candidates) {
      const std::int64_t delta = swap_delta(u, v);
      if (delta > 0) {
        std::swap(pi[u], pi[v]);
        score += delta;
        improved = true;
      }
    }
    if (!improved) break;
  }

  MatchResult result;
  result.pi_hat = std::move(pi);
  result.score = score;
  result.exact = false;
  result.maximizer_count = 0;
  result.elapsed_ms = ms_since(start);
  return result;
}

IsolationReport isolation_report(const Graph& a, const Graph& b, const Perm& pi,
                                 const CommunityLabels& sigma) {
  const Vertex n = a.vertex_count();
  if (b.vertex_count() != n || sigma.n() != n) {
    throw std::invalid_argument("isolation_report: dimension mismatch");
  }
  check_perm(pi, n);

  IsolationReport report;
  report.per_community.assign(sigma.k, 0);
  for (Vertex i = 0; i < n; ++i) {
    bool isolated = true;
    for (Vertex j = 0; j < n && isolated; ++j) {
      if (j == i) continue;
      if (a.edge(i, j) && b.edge(pi[i], pi[j])) isolated = false;
    }
    if (isolated) {
      report.t.push_back(i);
      ++report.per_community[sigma.sigma[i]];
    }
  }
  double log_bound = 0.0;
  for (auto size : report.per_community) log_bound -= std::lgamma(static_cast<double>(size) + 1.0);
  report.log_posterior_bound = log_bound;
  return report;
}

void attach_ground_truth_stats(MatchResult& result, const Graph& a, const Graph& b,
                               const CommunityLabels& sigma, const Perm& pi_star) {
  result.stats = match_stats(a, b, sigma, pi_star, result.pi_hat);
}

}  // namespace csbm
