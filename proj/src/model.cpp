#include "csbm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace csbm {

namespace {

// Sub-stream tags under an instance master seed.
constexpr std::uint64_t kLabelStream = 1;
constexpr std::uint64_t kParentStream = 2;
constexpr std::uint64_t kCopyStream = 3;
constexpr std::uint64_t kPermStream = 4;

}  // namespace

void SbmParams::validate() const {
  if (n == 0) throw std::invalid_argument("SbmParams: n must be positive");
  if (k == 0 || k > n) throw std::invalid_argument("SbmParams: need 1 <= k <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("SbmParams: p must be in [0,1]");
  if (!(q >= 0.0 && q <= p)) throw std::invalid_argument("SbmParams: need 0 <= q <= p");
}

double ScaledParams::community_size() const {
  if (k == 0 || n % k != 0) {
    throw std::invalid_argument("ScaledParams: k must divide n");
  }
  return static_cast<double>(n) / k;
}

SbmParams ScaledParams::to_sbm(LabelMode mode) const {
  const double m = community_size();
  if (m < 2.0) throw std::invalid_argument("ScaledParams: community size m must be >= 2");
  if (alpha <= 0.0 || beta < 0.0) {
    throw std::invalid_argument("ScaledParams: need alpha > 0 and beta >= 0");
  }
  const double p = alpha * std::log(m) / m;
  const double q = beta * std::log(m) / m;
  // Out-of-range densities are a hard error, never clamped.
  if (p > 1.0 || q > 1.0) {
    throw std::invalid_argument("ScaledParams: converted p or q exceeds 1");
  }
  SbmParams out;
  out.n = n;
  out.k = k;
  out.p = p;
  out.q = q;
  out.label_mode = mode;
  out.validate();
  return out;
}

std::vector<std::uint32_t> CommunityLabels::sizes() const {
  std::vector<std::uint32_t> out(k, 0);
  for (auto c : sigma) {
    if (c >= k) throw std::invalid_argument("CommunityLabels: label out of range");
    ++out[c];
  }
  return out;
}

bool balanced_within(const CommunityLabels& labels, double eps) {
  const double target = static_cast<double>(labels.n()) / labels.k;
  const double lo = (1.0 - eps / 2.0) * target;
  const double hi = (1.0 + eps / 2.0) * target;
  for (auto size : labels.sizes()) {
    if (size < lo || size > hi) return false;
  }
  return true;
}

CommunityLabels balanced_labels(std::uint32_t n, std::uint32_t k) {
  CommunityLabels labels;
  labels.k = k;
  labels.sigma.reserve(n);
  const std::uint32_t big = n % k;          // communities with ceil(n/k) vertices
  const std::uint32_t base = n / k;
  for (std::uint32_t c = 0; c < k; ++c) {
    const std::uint32_t size = base + (c < big ? 1 : 0);
    labels.sigma.insert(labels.sigma.end(), size, c);
  }
  return labels;
}

CommunityLabels sample_labels(const SbmParams& params, Rng& rng) {
  params.validate();
  if (params.label_mode == LabelMode::FixedBalanced) {
    return balanced_labels(params.n, params.k);
  }
  CommunityLabels labels;
  labels.k = params.k;
  labels.sigma.resize(params.n);
  for (auto& c : labels.sigma) {
    c = static_cast<std::uint32_t>(rng.below(params.k));
  }
  return labels;
}

Graph sample_sbm_edges(const SbmParams& params, const CommunityLabels& labels, Rng& rng) {
  params.validate();
  if (labels.n() != params.n || labels.k != params.k) {
    throw std::invalid_argument("sample_sbm_edges: labels do not match params");
  }
  Graph g(params.n);
  for (Vertex u = 0; u + 1 < params.n; ++u) {
    for (Vertex v = u + 1; v < params.n; ++v) {
      const double prob = labels.sigma[u] == labels.sigma[v] ? params.p : params.q;
      if (rng.bernoulli(prob)) g.set_edge(u, v, true);
    }
  }
  return g;
}

std::pair<Graph, CommunityLabels> sample_sbm(const SbmParams& params, Rng& rng) {
  CommunityLabels labels = sample_labels(params, rng);
  Graph g = sample_sbm_edges(params, labels, rng);
  return {std::move(g), std::move(labels)};
}

Graph subsample(const Graph& parent, double s, Rng& rng) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("subsample: s must be in [0,1]");
  Graph out(parent.vertex_count());
  parent.for_each_edge([&](Vertex u, Vertex v) {
    if (rng.bernoulli(s)) out.set_edge(u, v, true);
  });
  return out;
}

Graph apply_permutation(const Graph& g, const Perm& pi) {
  check_perm(pi, g.vertex_count());
  Graph out(g.vertex_count());
  g.for_each_edge([&](Vertex u, Vertex v) { out.set_edge(pi[u], pi[v], true); });
  return out;
}

Perm CorrelatedInstance::ground_truth(std::uint32_t j) const {
  if (j >= copies.size()) throw std::invalid_argument("ground_truth: copy index out of range");
  if (j == 0) return identity_perm(parent.vertex_count());
  return perms[j - 1];
}

Graph CorrelatedInstance::preimage_copy(std::uint32_t j) const {
  if (j == 0) return copies[0];
  return apply_permutation(copies[j], inverse_perm(perms[j - 1]));
}

CorrelatedInstance make_correlated_instance(const SbmParams& params, double s, std::uint32_t r,
                                            PermMode perm_mode, std::uint64_t seed,
                                            const std::vector<Perm>* given_perms,
                                            double condition_balance_eps) {
  params.validate();
  if (r < 2) throw std::invalid_argument("make_correlated_instance: need r >= 2");
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("make_correlated_instance: s in [0,1]");
  if (perm_mode == PermMode::Given) {
    if (given_perms == nullptr || given_perms->size() != r - 1) {
      throw std::invalid_argument("make_correlated_instance: need r-1 given permutations");
    }
    for (const Perm& pi : *given_perms) check_perm(pi, params.n);
  }

  CorrelatedInstance inst;
  inst.params = params;
  inst.s = s;
  inst.seed = seed;
  inst.conditioned_on_balanced = condition_balance_eps > 0.0;
  inst.balance_eps = condition_balance_eps;

  // Labels, with optional rejection until the balancedness event holds.
  std::uint64_t attempt = 0;
  for (;;) {
    Rng label_rng(derive_seed(seed, kLabelStream, attempt));
    inst.sigma = sample_labels(params, label_rng);
    if (condition_balance_eps <= 0.0 || balanced_within(inst.sigma, condition_balance_eps)) break;
    if (++attempt > 100000) {
      throw std::runtime_error("make_correlated_instance: balancedness rejection did not terminate");
    }
  }

  Rng parent_rng(derive_seed(seed, kParentStream));
  inst.parent = sample_sbm_edges(params, inst.sigma, parent_rng);

  inst.copies.reserve(r);
  inst.perms.reserve(r - 1);
  for (std::uint32_t j = 0; j < r; ++j) {
    Rng copy_rng(derive_seed(seed, kCopyStream, j));
    Graph copy = subsample(inst.parent, s, copy_rng);
    if (j == 0) {
      inst.copies.push_back(std::move(copy));
      continue;
    }
    Perm pi;
    switch (perm_mode) {
      case PermMode::Identity:
        pi = identity_perm(params.n);
        break;
      case PermMode::Given:
        pi = (*given_perms)[j - 1];
        break;
      case PermMode::UniformRandom: {
        Rng perm_rng(derive_seed(seed, kPermStream, j));
        pi = random_perm(params.n, perm_rng);
        break;
      }
    }
    inst.copies.push_back(apply_permutation(copy, pi));
    inst.perms.push_back(std::move(pi));
  }
  return inst;
}

CorrelatedInstance make_correlated_instance(const ScaledParams& scaled, PermMode perm_mode,
                                            std::uint64_t seed,
                                            const std::vector<Perm>* given_perms,
                                            double condition_balance_eps) {
  return make_correlated_instance(scaled.to_sbm(), scaled.s, scaled.r, perm_mode, seed,
                                  given_perms, condition_balance_eps);
}

}  // namespace csbm
