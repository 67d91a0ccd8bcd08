#include "csbm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csbm {

namespace {

ThresholdVerdict make_verdict(double quantity, double threshold, Relation relation,
                              std::string tag, bool free_constants = false) {
  ThresholdVerdict v;
  v.quantity = quantity;
  v.threshold = threshold;
  v.margin = quantity - threshold;
  v.relation = relation;
  switch (relation) {
    case Relation::Greater:
      v.satisfied = quantity > threshold;
      break;
    case Relation::Less:
      v.satisfied = quantity < threshold;
      break;
    case Relation::AtMost:
      v.satisfied = quantity <= threshold;
      break;
  }
  v.regime_tag = std::move(tag);
  v.uses_free_constants = free_constants;
  return v;
}

double average_degree_rate(std::uint32_t n, double p, double q, std::uint32_t k, double s) {
  return n * s * s * (p + (k - 1.0) * q) / k;
}

}  // namespace

ThresholdVerdict matching_achievability(std::uint32_t n, double p, double q, std::uint32_t k,
                                        double s, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("matching_achievability: eps must be positive");
  const double quantity = average_degree_rate(n, p, q, k, s);
  const double threshold = (1.0 + eps) * std::log(static_cast<double>(n));
  return make_verdict(quantity, threshold, Relation::Greater, "matching-achievability-degree");
}

ThresholdVerdict matching_k_condition(std::uint32_t n, double p, double q, std::uint32_t k,
                                      double s, double big_c, double small_c) {
  const double cap = big_c * std::min({std::sqrt(n * p * s * s), n * q * s * s,
                                       std::pow(static_cast<double>(n), small_c)});
  return make_verdict(static_cast<double>(k), cap, Relation::AtMost,
                      "matching-achievability-k", true);
}

ThresholdVerdict matching_converse(std::uint32_t n, double p, double q, std::uint32_t k,
                                   double s, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("matching_converse: eps must be positive");
  const double quantity = average_degree_rate(n, p, q, k, s);
  const double threshold = (1.0 - eps) * std::log(static_cast<double>(n));
  return make_verdict(quantity, threshold, Relation::Less, "matching-converse-degree");
}

ThresholdVerdict converse_k_condition(std::uint32_t n, std::uint32_t k, double t) {
  const double cap = std::pow(static_cast<double>(n), t);
  return make_verdict(static_cast<double>(k), cap, Relation::AtMost, "matching-converse-k", true);
}

ThresholdVerdict recovery_threshold(double alpha, double beta, double s, std::uint32_t r) {
  if (!(alpha > beta && beta >= 0.0)) {
    throw std::invalid_argument("recovery_threshold: need alpha > beta >= 0");
  }
  if (!(s >= 0.0 && s <= 1.0) || r < 1) {
    throw std::invalid_argument("recovery_threshold: need s in [0,1] and r >= 1");
  }
  const double quantity = std::sqrt(alpha) - std::sqrt(beta);
  const double effective = 1.0 - std::pow(1.0 - s, static_cast<double>(r));
  const double threshold =
      effective > 0.0 ? std::sqrt(1.0 / effective) : std::numeric_limits<double>::infinity();
  return make_verdict(quantity, threshold, Relation::Greater, "recovery-threshold");
}

ThresholdVerdict matching_side_condition(double alpha, double beta, std::uint32_t k, double s) {
  const double quantity = s * s * (alpha + (k - 1.0) * beta);
  return make_verdict(quantity, 1.0, Relation::Greater, "matching-side-condition");
}

ThresholdVerdict conjecture_condition(double alpha, double beta, std::uint32_t k, double s) {
  const double root_gap = std::sqrt(alpha) - std::sqrt(beta);
  const double quantity =
      s * s * (alpha + (k - 1.0) * beta) + s * (1.0 - s) * root_gap * root_gap;
  return make_verdict(quantity, 1.0, Relation::Greater, "conjecture-condition");
}

void PgfBoundInputs::validate() const {
  if (!(omega >= 1.0 && omega <= 3.0 && zeta >= 1.0 && zeta <= 3.0)) {
    throw std::invalid_argument("PgfBoundInputs: omega and zeta must lie in [1,3]");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("PgfBoundInputs: epsilon must lie in (0,1)");
  }
  if (m_plus < 0 || m_minus < 0) {
    throw std::invalid_argument("PgfBoundInputs: pair counts must be non-negative");
  }
}

double pgf_upper_bound(const PgfBoundInputs& inputs) {
  inputs.validate();
  return std::exp(-(1.0 - inputs.epsilon) * inputs.s * inputs.s *
                  (inputs.p * inputs.m_plus + inputs.q * inputs.m_minus));
}

namespace {

// Per-pair joint law of (A_e, B'_e): patterns (1,1), (1,0), (0,1), (0,0).
struct PatternLaw {
  double prob[4];
};

PatternLaw pattern_law(double density, double s) {
  PatternLaw law;
  law.prob[0] = s * s * density;
  law.prob[1] = s * (1.0 - s) * density;
  law.prob[2] = s * (1.0 - s) * density;
  law.prob[3] = 1.0 - (2.0 * s - s * s) * density;
  return law;
}

// One pair in the enumeration order. Pairs are grouped cycle by cycle so the
// X cross terms a_e * b_{rho(e)} close as the walk advances.
struct PairSlot {
  bool intra = false;
  bool cycle_start = false;
  bool cycle_end = false;
};

struct PgfEnumerator {
  std::vector<PairSlot> slots;
  std::vector<PatternLaw> laws;
  double theta, inv_theta, omega, zeta;
  double total = 0.0;

  // a_prev is the A-value of the predecessor pair in the cycle walk and
  // b_first the B'-value of the current cycle's first pair.
  void walk(std::size_t depth, double weight, int a_prev, int b_first) {
    if (depth == slots.size()) {
      total += weight;
      return;
    }
    const PairSlot& slot = slots[depth];
    const PatternLaw& law = laws[depth];
    for (int pattern = 0; pattern < 4; ++pattern) {
      const double prob = law.prob[pattern];
      if (prob == 0.0) continue;
      const int a = pattern < 2 ? 1 : 0;
      const int b = (pattern == 0 || pattern == 2) ? 1 : 0;
      double w = weight * prob;
      // X gains +a_e b_e at e, and -a_{pred} b_e once the predecessor is known.
      int dx = a * b;
      if (!slot.cycle_start) dx -= a_prev * b;
      if (a && b) w *= slot.intra ? omega : zeta;  // Y+ / Y-
      if (dx > 0) w *= theta;
      if (dx < 0) w *= inv_theta;
      if (slot.cycle_end) {
        // Close the cycle: the term -a_last b_first.
        if (a && b_first) w *= inv_theta;
        walk(depth + 1, w, 0, 0);
      } else {
        walk(depth + 1, w, a, slot.cycle_start ? b : b_first);
      }
    }
  }
};

}  // namespace

double pgf_exact_tiny(const SbmParams& params, const CommunityLabels& sigma, const Perm& pi_star,
                      const Perm& pi, double theta, double omega, double zeta, double s) {
  params.validate();
  const Vertex n = params.n;
  if (n > 5) throw std::invalid_argument("pgf_exact_tiny: enumeration capped at n <= 5");
  if (sigma.n() != n) throw std::invalid_argument("pgf_exact_tiny: sigma does not match params");
  check_perm(pi_star, n);
  check_perm(pi, n);
  if (!(theta > 0.0)) throw std::invalid_argument("pgf_exact_tiny: theta must be positive");
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("pgf_exact_tiny: s in [0,1]");

  // rho = tau*^-1 tau over pair indices; only pairs moved by rho carry
  // exponents, and the fixed pairs integrate out to probability one.
  const Perm rho = compose_perm(inverse_perm(pi_star), pi);
  const PairIndexer indexer(n);
  const std::uint64_t m = indexer.count();

  PgfEnumerator enumerator;
  enumerator.theta = theta;
  enumerator.inv_theta = 1.0 / theta;
  enumerator.omega = omega;
  enumerator.zeta = zeta;

  std::vector<bool> visited(m, false);
  for (std::uint64_t start = 0; start < m; ++start) {
    if (visited[start]) continue;
    std::vector<std::uint64_t> cycle;
    std::uint64_t e = start;
    do {
      visited[e] = true;
      cycle.push_back(e);
      auto [i, j] = indexer.pair(e);
      e = pair_index(rho[i], rho[j], n);
    } while (e != start);
    if (cycle.size() < 2) continue;
    for (std::size_t t = 0; t < cycle.size(); ++t) {
      auto [i, j] = indexer.pair(cycle[t]);
      PairSlot slot;
      slot.intra = sigma.sigma[i] == sigma.sigma[j];
      slot.cycle_start = t == 0;
      slot.cycle_end = t + 1 == cycle.size();
      enumerator.slots.push_back(slot);
      enumerator.laws.push_back(pattern_law(slot.intra ? params.p : params.q, s));
    }
  }

  if (enumerator.slots.empty()) return 1.0;  // tau = tau*: all sums are empty
  enumerator.walk(0, 1.0, 0, 0);
  return enumerator.total;
}

DeltaExponent error_exponent_delta(std::uint32_t n, double p, double q, std::uint32_t k,
                                   double s, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("error_exponent_delta: eps must lie in (0,1)");
  }
  const double log_n = std::log(static_cast<double>(n));
  const double intra_term = eps * eps * (1.0 - eps) * n * p * s * s / (100.0 * k * log_n);
  DeltaExponent out;
  if (k == 1) {
    // The inter-community term has a structural (k-1) factor of zero; report
    // the two-term value for the correlated ER case.
    out.value = std::min(eps / 2.0, intra_term);
    out.k1_degenerate = true;
    return out;
  }
  const double inter_term = eps * eps * (k - 1.0) * n * q * s * s / (100.0 * k * log_n);
  out.value = std::min({eps / 2.0, intra_term, inter_term});
  return out;
}

double isolation_probability(std::uint32_t n, double p, double q, double s,
                             const std::vector<std::uint32_t>& community_sizes,
                             std::uint32_t r_index) {
  if (r_index >= community_sizes.size()) {
    throw std::invalid_argument("isolation_probability: community index out of range");
  }
  std::uint64_t total = 0;
  for (auto size : community_sizes) total += size;
  if (total != n) throw std::invalid_argument("isolation_probability: sizes must sum to n");
  const double size_r = community_sizes[r_index];
  return std::pow(1.0 - s * s * p, size_r - 1.0) *
         std::pow(1.0 - s * s * q, static_cast<double>(n) - size_r);
}

IsolationMoments isolation_moments(std::uint32_t n, double p, double q, double s,
                                   const std::vector<std::uint32_t>& community_sizes) {
  IsolationMoments out;
  const double prob = isolation_probability(n, p, q, s, community_sizes, 0);
  const double size1 = community_sizes[0];
  out.mean = size1 * prob;
  const double ps2 = p * s * s;
  if (ps2 >= 1.0) {
    out.degenerate = true;
    out.variance = 0.0;
    return out;
  }
  out.variance = out.mean + (size1 * ps2 - 1.0) / (size1 * (1.0 - ps2)) * out.mean * out.mean;
  return out;
}

bool balanced_event_check(const CommunityLabels& sigma, double eps) {
  return balanced_within(sigma, eps);
}

MBoundWitness m_lower_bounds(const CommunityLabels& sigma, const MismatchProfile& profile,
                             double eps, MBoundCase bound_case) {
  const std::uint32_t k = sigma.k;
  if (profile.x.size() != k) {
    throw std::invalid_argument("m_lower_bounds: profile does not match sigma");
  }
  const double n = sigma.n();
  const double total = static_cast<double>(profile.total());
  // Worst case over the mismatch class: transposed-pair counts at their cap.
  const std::int64_t e_tr_cap = static_cast<std::int64_t>(profile.total()) / 2;
  const auto [m_plus, m_minus] = m_counts_closed_form(sigma, profile, e_tr_cap, e_tr_cap);

  const double scale = bound_case == MBoundCase::SmallX ? 1.0 : 0.5;
  MBoundWitness witness;
  witness.lhs_plus = static_cast<double>(m_plus);
  witness.lhs_minus = static_cast<double>(m_minus);
  witness.rhs_plus = (1.0 - eps) * scale * n / k * total;
  witness.rhs_minus = (1.0 - eps) * scale * (k - 1.0) * n / k * total;
  return witness;
}

}  // namespace csbm
