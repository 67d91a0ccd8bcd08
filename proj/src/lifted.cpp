#include "csbm/lifted.hpp"

#include <stdexcept>

namespace csbm {

PairIndexer::PairIndexer(Vertex n) : n_(n) {
  pairs_.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Vertex u = 0; u + 1 < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) pairs_.emplace_back(u, v);
  }
}

LiftedPermutation::LiftedPermutation(Perm base, Vertex n) : base_(std::move(base)), n_(n) {
  check_perm(base_, n_);
}

LiftedPermutation LiftedPermutation::compose(const LiftedPermutation& other) const {
  return LiftedPermutation(compose_perm(base_, other.base_), n_);
}

LiftedPermutation LiftedPermutation::inverse() const {
  return LiftedPermutation(inverse_perm(base_), n_);
}

LiftedPermutation lift(const Perm& pi) {
  return LiftedPermutation(pi, static_cast<Vertex>(pi.size()));
}

std::uint64_t MismatchProfile::total() const {
  std::uint64_t t = 0;
  for (auto v : x) t += v;
  return t;
}

MismatchProfile mismatch_profile(const CommunityLabels& sigma, const Perm& pi_star,
                                 const Perm& pi) {
  const Vertex n = sigma.n();
  check_perm(pi_star, n);
  check_perm(pi, n);
  MismatchProfile profile;
  profile.x.assign(sigma.k, 0);
  for (Vertex i = 0; i < n; ++i) {
    if (pi[i] != pi_star[i]) ++profile.x[sigma.sigma[i]];
  }
  return profile;
}

PairClass pair_classes(const CommunityLabels& sigma) {
  const Vertex n = sigma.n();
  PairClass out;
  for (Vertex u = 0; u + 1 < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      const std::uint64_t idx = pair_index(u, v, n);
      if (sigma.sigma[u] == sigma.sigma[v]) {
        out.e_plus.push_back(idx);
      } else {
        out.e_minus.push_back(idx);
      }
    }
  }
  return out;
}

MatchStats match_stats(const Graph& a, const Graph& b, const CommunityLabels& sigma,
                       const Perm& pi_star, const Perm& pi) {
  const Vertex n = a.vertex_count();
  if (b.vertex_count() != n || sigma.n() != n) {
    throw std::invalid_argument("match_stats: dimension mismatch");
  }
  check_perm(pi_star, n);
  check_perm(pi, n);

  MatchStats stats;
  stats.profile = mismatch_profile(sigma, pi_star, pi);

  for (Vertex i = 0; i + 1 < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      const bool intra = sigma.sigma[i] == sigma.sigma[j];
      const bool a_e = a.edge(i, j);
      const bool b_tau = b.edge(pi[i], pi[j]);
      if (a_e && b_tau) ++stats.overlap;

      const std::uint64_t tau_e = pair_index(pi[i], pi[j], n);
      const std::uint64_t tau_star_e = pair_index(pi_star[i], pi_star[j], n);
      if (tau_e == tau_star_e) {
        // Fixed pairs whose endpoints are swapped onto each other's images;
        // for i != j this implies both endpoints are mismatched.
        if (pi[i] == pi_star[j] && pi[j] == pi_star[i]) {
          if (intra) ++stats.e_tr_plus; else ++stats.e_tr_minus;
        }
        continue;
      }
      const bool b_star = b.edge(pi_star[i], pi_star[j]);
      if (intra) ++stats.m_plus; else ++stats.m_minus;
      if (a_e) {
        stats.x += static_cast<std::int64_t>(b_star) - static_cast<std::int64_t>(b_tau);
        if (b_star) {
          if (intra) ++stats.y_plus; else ++stats.y_minus;
        }
      }
    }
  }

  stats.cycles = cycle_decomposition(pi_star, pi);
  return stats;
}

std::pair<std::int64_t, std::int64_t> m_counts_closed_form(const CommunityLabels& sigma,
                                                         const MismatchProfile& profile,
                                                         std::int64_t e_tr_plus,
                                                         std::int64_t e_tr_minus) {
  if (profile.x.size() != sigma.k) {
    throw std::invalid_argument("m_counts_closed_form: profile does not match sigma");
  }
  const auto sizes = sigma.sizes();
  std::int64_t total = 0;
  for (std::uint32_t r = 0; r < sigma.k; ++r) {
    if (profile.x[r] > sizes[r]) {
      throw std::invalid_argument("m_counts_closed_form: x_r exceeds community size");
    }
    total += static_cast<std::int64_t>(profile.x[r]);
  }
  if (e_tr_plus < 0 || e_tr_minus < 0 || 2 * e_tr_plus > total || 2 * e_tr_minus > total) {
    throw std::invalid_argument("m_counts_closed_form: E_tr count exceeds (sum x_r)/2 cap");
  }

  const std::int64_t n = sigma.n();
  std::int64_t m_plus = -e_tr_plus;
  std::int64_t m_minus = -e_tr_minus;
  std::int64_t sum_sq = 0;
  for (std::uint32_t r = 0; r < sigma.k; ++r) {
    const std::int64_t x = static_cast<std::int64_t>(profile.x[r]);
    const std::int64_t size = static_cast<std::int64_t>(sizes[r]);
    m_plus += x * (x - 1) / 2 + x * (size - x);
    m_minus += x * (n - size);
    sum_sq += x * x;
  }
  // sum_{r<r'} x_r x_{r'} = ((sum x)^2 - sum x^2) / 2
  m_minus -= (total * total - sum_sq) / 2;
  return {m_plus, m_minus};
}

std::vector<std::uint64_t> cycle_decomposition(const Perm& pi_star, const Perm& pi) {
  const Vertex n = static_cast<Vertex>(pi_star.size());
  check_perm(pi_star, n);
  check_perm(pi, n);
  // tau*^-1 tau = lift(pi*^-1 pi) acting on pair indices.
  const Perm rho = compose_perm(inverse_perm(pi_star), pi);

  const PairIndexer indexer(n);
  const std::uint64_t m = indexer.count();
  std::vector<bool> visited(m, false);
  std::vector<std::uint64_t> lengths;
  for (std::uint64_t start = 0; start < m; ++start) {
    if (visited[start]) continue;
    std::uint64_t len = 0;
    std::uint64_t e = start;
    do {
      visited[e] = true;
      ++len;
      auto [i, j] = indexer.pair(e);
      e = pair_index(rho[i], rho[j], n);
    } while (e != start);
    lengths.push_back(len);
  }
  std::sort(lengths.begin(), lengths.end());
  return lengths;
}

std::map<std::uint64_t, std::uint64_t> cycle_histogram(const std::vector<std::uint64_t>& cycles) {
  std::map<std::uint64_t, std::uint64_t> hist;
  for (auto len : cycles) ++hist[len];
  return hist;
}

}  // namespace csbm
