#include "csbm/recovery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csbm {

namespace {

constexpr std::uint64_t kLocalSearchStream = 11;
constexpr std::uint64_t kSpectralStream = 12;

// Minimum assignment cost on a square matrix (Kuhn-Munkres with potentials).
// Returns row -> column.
std::vector<int> min_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j]) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

UnionGraph union_under(const std::vector<Perm>& pi_list, const std::vector<Graph>& graphs,
                       double p, double q, double s) {
  if (graphs.empty()) throw std::invalid_argument("union_under: no graphs");
  const Vertex n = graphs[0].vertex_count();
  if (pi_list.size() != graphs.size() - 1) {
    throw std::invalid_argument("union_under: need one permutation per graph beyond the first");
  }
  UnionGraph out;
  out.r = static_cast<std::uint32_t>(graphs.size());
  out.h = graphs[0];
  for (std::size_t t = 1; t < graphs.size(); ++t) {
    if (graphs[t].vertex_count() != n) throw std::invalid_argument("union_under: dimension mismatch");
    check_perm(pi_list[t - 1], n);
    const Perm inv = inverse_perm(pi_list[t - 1]);
    graphs[t].for_each_edge([&](Vertex x, Vertex y) { out.h.set_edge(inv[x], inv[y], true); });
  }
  const double keep = 1.0 - std::pow(1.0 - s, static_cast<double>(out.r));
  out.effective_p = p * keep;
  out.effective_q = q * keep;
  return out;
}

SplitWeights SplitWeights::from_subsampling(double s) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw std::invalid_argument("SplitWeights: weights are undefined at s = 0");
  }
  const double denom = 1.0 - (1.0 - s) * (1.0 - s);
  SplitWeights w;
  w.r11 = s * s / denom;
  w.r10 = s * (1.0 - s) / denom;
  w.r01 = w.r10;
  return w;
}

std::pair<Graph, Graph> split_pair(const Graph& h, double s, Rng& rng) {
  const SplitWeights w = SplitWeights::from_subsampling(s);
  Graph first(h.vertex_count()), second(h.vertex_count());
  h.for_each_edge([&](Vertex u, Vertex v) {
    const double roll = rng.uniform();
    if (roll < w.r11) {
      first.set_edge(u, v, true);
      second.set_edge(u, v, true);
    } else if (roll < w.r11 + w.r10) {
      first.set_edge(u, v, true);
    } else {
      second.set_edge(u, v, true);
    }
  });
  return {std::move(first), std::move(second)};
}

std::vector<Graph> split_r(const Graph& h, double s, std::uint32_t r, Rng& rng) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("split_r: weights undefined at s = 0");
  if (r < 1 || r > 16) throw std::invalid_argument("split_r: need 1 <= r <= 16");
  const double denom = 1.0 - std::pow(1.0 - s, static_cast<double>(r));
  const std::uint32_t patterns = (1u << r) - 1;
  std::vector<double> cumulative(patterns);
  double acc = 0.0;
  for (std::uint32_t t = 1; t <= patterns; ++t) {
    const int ones = std::popcount(t);
    acc += std::pow(s, ones) * std::pow(1.0 - s, static_cast<double>(r - ones)) / denom;
    cumulative[t - 1] = acc;
  }
  cumulative.back() = 1.0;

  std::vector<Graph> out(r, Graph(h.vertex_count()));
  h.for_each_edge([&](Vertex u, Vertex v) {
    const double roll = rng.uniform();
    std::uint32_t t = 1;
    while (cumulative[t - 1] <= roll) ++t;
    for (std::uint32_t j = 0; j < r; ++j) {
      if (t & (1u << j)) out[j].set_edge(u, v, true);
    }
  });
  return out;
}

RecoveryResult recover_exact_ml(const Graph& h, std::uint32_t k, double p_eff, double q_eff) {
  const Vertex n = h.vertex_count();
  if (n > 14) throw std::invalid_argument("recover_exact_ml: enumeration capped at n <= 14");
  if (k == 0) throw std::invalid_argument("recover_exact_ml: k must be positive");
  if (!(p_eff > q_eff)) throw std::invalid_argument("recover_exact_ml: need p_eff > q_eff");

  RecoveryResult result;
  result.method = "exact-ml";
  if (k == 1 || n == 0) {
    result.sigma_hat.k = k;
    result.sigma_hat.sigma.assign(n, 0);
    return result;
  }

  // Likelihood weights, clamped away from the degenerate endpoints; the
  // argmax is unchanged and densities 0/1 stay usable.
  constexpr double kTiny = 1e-12;
  const double p = std::clamp(p_eff, kTiny, 1.0 - kTiny);
  const double q = std::clamp(q_eff, kTiny, 1.0 - kTiny);
  const double w_edge = std::log(p / q);
  const double w_gap = std::log((1.0 - q) / (1.0 - p));

  // Score of a labeling depends only on (intra edges, intra pairs); keeping
  // the score a function of those integers makes tie handling exact.
  const auto score_of = [&](std::int64_t intra_edges, std::int64_t intra_pairs) {
    return w_edge * static_cast<double>(intra_edges) -
           w_gap * static_cast<double>(intra_pairs - intra_edges);
  };

  std::vector<std::uint32_t> labels(n, 0);
  std::vector<std::uint32_t> best_labels;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  // Depth-first over canonical labelings: vertex 0 is fixed to community 0
  // and a new label may only follow all smaller ones.
  const auto dfs = [&](auto&& self, Vertex t, std::uint32_t used, std::int64_t intra_edges,
                       std::int64_t intra_pairs) -> void {
    if (t == n) {
      const double score = score_of(intra_edges, intra_pairs);
      if (!have_best || score > best_score) {
        have_best = true;
        best_score = score;
        best_labels = labels;
      }
      return;
    }
    std::vector<std::int64_t> edges_to(used, 0);
    std::vector<std::int64_t> size_of(used, 0);
    for (Vertex i = 0; i < t; ++i) {
      ++size_of[labels[i]];
      if (h.edge(i, t)) ++edges_to[labels[i]];
    }
    const std::uint32_t limit = std::min<std::uint32_t>(used + 1, k);
    for (std::uint32_t c = 0; c < limit; ++c) {
      labels[t] = c;
      const std::int64_t add_edges = c < used ? edges_to[c] : 0;
      const std::int64_t add_pairs = c < used ? size_of[c] : 0;
      self(self, t + 1, std::max(used, c + 1), intra_edges + add_edges, intra_pairs + add_pairs);
    }
    labels[t] = 0;
  };
  dfs(dfs, 1, 1, 0, 0);

  result.sigma_hat.k = k;
  result.sigma_hat.sigma = std::move(best_labels);
  return result;
}

RecoveryResult recover_spectral(const Graph& h, std::uint32_t k, int restarts, Rng& rng) {
  const Vertex n = h.vertex_count();
  if (k == 0 || k > n) throw std::invalid_argument("recover_spectral: need 1 <= k <= n");

  RecoveryResult result;
  result.method = "spectral";
  result.sigma_hat.k = k;
  if (k == 1) {
    result.sigma_hat.sigma.assign(n, 0);
    return result;
  }

  // Shifted power iteration: A + (max degree + 1) I is positive definite, so
  // deflated iterations converge to the top of the spectrum without sign flips.
  double shift = 0.0;
  for (Vertex v = 0; v < n; ++v) shift = std::max(shift, static_cast<double>(h.degree(v)));
  shift += 1.0;

  constexpr int kMaxIters = 600;
  constexpr double kTol = 1e-10;
  std::vector<std::vector<double>> basis;
  bool all_converged = true;

  const auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    h.for_each_edge([&](Vertex u, Vertex v) {
      y[u] += x[v];
      y[v] += x[u];
    });
    for (Vertex v = 0; v < n; ++v) y[v] += shift * x[v];
  };

  for (std::uint32_t vec = 0; vec < k; ++vec) {
    std::vector<double> x(n), y(n);
    for (auto& value : x) value = rng.uniform() - 0.5;
    bool converged = false;
    for (int iter = 0; iter < kMaxIters; ++iter) {
      matvec(x, y);
      for (const auto& prev : basis) {
        double dot = 0.0;
        for (Vertex i = 0; i < n; ++i) dot += prev[i] * y[i];
        for (Vertex i = 0; i < n; ++i) y[i] -= dot * prev[i];
      }
      double norm = 0.0;
      for (double value : y) norm += value * value;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      double diff = 0.0;
      for (Vertex i = 0; i < n; ++i) {
        y[i] /= norm;
        diff = std::max(diff, std::abs(y[i] - x[i]));
      }
      x.swap(y);
      if (diff < kTol) {
        converged = true;
        break;
      }
    }
    if (!converged) all_converged = false;
    basis.push_back(std::move(x));
  }
  result.converged = all_converged;

  // k-means on the embedding rows, best objective over seeded restarts.
  const auto row = [&](Vertex i, std::uint32_t d) { return basis[d][i]; };
  std::vector<std::uint32_t> best_assign(n, 0);
  double best_objective = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt < std::max(restarts, 1); ++attempt) {
    std::vector<std::vector<double>> centroids(k, std::vector<double>(k, 0.0));
    std::vector<Vertex> picks;
    while (picks.size() < k) {
      const Vertex candidate = static_cast<Vertex>(rng.below(n));
      if (std::find(picks.begin(), picks.end(), candidate) == picks.end()) {
        picks.push_back(candidate);
      }
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      for (std::uint32_t d = 0; d < k; ++d) centroids[c][d] = row(picks[c], d);
    }

    std::vector<std::uint32_t> assign(n, 0);
    for (int round = 0; round < 200; ++round) {
      bool changed = false;
      for (Vertex i = 0; i < n; ++i) {
        double best_dist = std::numeric_limits<double>::infinity();
        std::uint32_t best_c = 0;
        for (std::uint32_t c = 0; c < k; ++c) {
          double dist = 0.0;
          for (std::uint32_t d = 0; d < k; ++d) {
            const double delta = row(i, d) - centroids[c][d];
            dist += delta * delta;
          }
          if (dist < best_dist) {
            best_dist = dist;
            best_c = c;
          }
        }
        if (assign[i] != best_c) {
          assign[i] = best_c;
          changed = true;
        }
      }
      std::vector<std::uint32_t> counts(k, 0);
      for (auto& centroid : centroids) std::fill(centroid.begin(), centroid.end(), 0.0);
      for (Vertex i = 0; i < n; ++i) {
        ++counts[assign[i]];
        for (std::uint32_t d = 0; d < k; ++d) centroids[assign[i]][d] += row(i, d);
      }
      for (std::uint32_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
          // Reseed an empty cluster at a deterministic fallback point.
          const Vertex pick = static_cast<Vertex>(rng.below(n));
          for (std::uint32_t d = 0; d < k; ++d) centroids[c][d] = row(pick, d);
          continue;
        }
        for (std::uint32_t d = 0; d < k; ++d) centroids[c][d] /= counts[c];
      }
      if (!changed) break;
    }

    double objective = 0.0;
    for (Vertex i = 0; i < n; ++i) {
      for (std::uint32_t d = 0; d < k; ++d) {
        const double delta = row(i, d) - centroids[assign[i]][d];
        objective += delta * delta;
      }
    }
    if (objective < best_objective) {
      best_objective = objective;
      best_assign = assign;
    }
  }

  result.sigma_hat.sigma = std::move(best_assign);
  return result;
}

double agreement(const CommunityLabels& sigma_hat, const CommunityLabels& sigma) {
  const Vertex n = sigma.n();
  if (sigma_hat.n() != n) throw std::invalid_argument("agreement: length mismatch");
  if (n == 0) return 1.0;
  std::uint32_t k = std::max(sigma_hat.k, sigma.k);
  for (Vertex i = 0; i < n; ++i) {
    k = std::max({k, sigma_hat.sigma[i] + 1, sigma.sigma[i] + 1});
  }
  std::vector<std::vector<double>> confusion(k, std::vector<double>(k, 0.0));
  for (Vertex i = 0; i < n; ++i) confusion[sigma_hat.sigma[i]][sigma.sigma[i]] += 1.0;

  double max_cell = 0.0;
  for (const auto& row : confusion) {
    for (double cell : row) max_cell = std::max(max_cell, cell);
  }
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::uint32_t a = 0; a < k; ++a) {
    for (std::uint32_t b = 0; b < k; ++b) cost[a][b] = max_cell - confusion[a][b];
  }
  const std::vector<int> assignment = min_assignment(cost);
  double matched = 0.0;
  for (std::uint32_t a = 0; a < k; ++a) matched += confusion[a][assignment[a]];
  return matched / n;
}

void score_against(RecoveryResult& result, const CommunityLabels& sigma) {
  result.agreement = agreement(result.sigma_hat, sigma);
  result.exact_success = result.agreement == 1.0;
}

PipelineResult two_step_pipeline(const CorrelatedInstance& instance, MatcherKind matcher,
                                 RecoveryKind recovery, const PipelineConfig& config) {
  PipelineResult out;
  const std::uint32_t r = instance.r();
  const Graph& a = instance.copies[0];

  std::vector<Perm> estimated;
  estimated.reserve(r - 1);
  out.matched_exactly = true;
  for (std::uint32_t j = 1; j < r; ++j) {
    MatchResult match;
    switch (matcher) {
      case MatcherKind::Exhaustive:
        match = exhaustive_match(a, instance.copies[j], TiePolicy::Lex, config.exhaustive_cap);
        break;
      case MatcherKind::BranchAndBound:
        match = bnb_match(a, instance.copies[j], config.budget);
        break;
      case MatcherKind::LocalSearch: {
        Rng rng(derive_seed(config.seed, kLocalSearchStream, j));
        match = seeded_local_search(a, instance.copies[j], {}, config.local_iters, rng);
        break;
      }
      case MatcherKind::Oracle: {
        match.pi_hat = instance.ground_truth(j);
        match.score = overlap(a, instance.copies[j], match.pi_hat);
        match.exact = true;
        match.maximizer_count = 1;
        break;
      }
    }
    if (match.pi_hat != instance.ground_truth(j)) out.matched_exactly = false;
    estimated.push_back(match.pi_hat);
    out.matches.push_back(std::move(match));
  }

  out.union_graph =
      union_under(estimated, instance.copies, instance.params.p, instance.params.q, instance.s);

  switch (recovery) {
    case RecoveryKind::ExactMl:
      out.recovery = recover_exact_ml(out.union_graph.h, instance.params.k,
                                      out.union_graph.effective_p, out.union_graph.effective_q);
      break;
    case RecoveryKind::Spectral: {
      Rng rng(derive_seed(config.seed, kSpectralStream));
      out.recovery = recover_spectral(out.union_graph.h, instance.params.k,
                                      config.spectral_restarts, rng);
      break;
    }
  }
  score_against(out.recovery, instance.sigma);
  return out;
}

}  // namespace csbm
