#include "csbm/selftest.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "csbm/harness.hpp"
#include "csbm/lifted.hpp"
#include "csbm/matcher.hpp"
#include "csbm/model.hpp"
#include "csbm/recovery.hpp"
#include "csbm/theory.hpp"

namespace csbm {

namespace {

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// Random correlated instance small enough for exhaustive checking.
CorrelatedInstance tiny_instance(Rng& rng, Vertex max_n, std::uint32_t max_k, double s) {
  SbmParams params;
  params.n = 4 + static_cast<Vertex>(rng.below(max_n - 3));
  params.k = 1 + static_cast<std::uint32_t>(rng.below(max_k));
  params.p = 0.3 + 0.5 * rng.uniform();
  params.q = params.p * rng.uniform();
  params.label_mode = LabelMode::UniformRandom;
  return make_correlated_instance(params, s, 2, PermMode::UniformRandom, rng.next());
}

}  // namespace

bool run_selftest(std::ostream& out, std::uint64_t seed) {
  bool all_ok = true;
  const auto check = [&](const std::string& name, bool ok) {
    out << (ok ? "ok   " : "FAIL ") << name << "\n";
    all_ok = all_ok && ok;
  };

  Rng rng(derive_seed(seed, 0xC0DE));

  // Closed-form M counts against the definitional counts.
  {
    bool ok = true;
    for (int trial = 0; trial < 300 && ok; ++trial) {
      const CorrelatedInstance inst = tiny_instance(rng, 10, 3, 0.6);
      const Perm pi = random_perm(inst.params.n, rng);
      const MatchStats stats = match_stats(inst.copies[0], inst.copies[1], inst.sigma,
                                           inst.ground_truth(1), pi);
      const auto [m_plus, m_minus] =
          m_counts_closed_form(inst.sigma, stats.profile, stats.e_tr_plus, stats.e_tr_minus);
      ok = m_plus == stats.m_plus && m_minus == stats.m_minus;
    }
    check("closed-form pair counts match definitional counts", ok);
  }

  // X equals the overlap difference computed through a second path.
  {
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
      const CorrelatedInstance inst = tiny_instance(rng, 8, 3, 0.5);
      const Perm pi = random_perm(inst.params.n, rng);
      const Perm truth = inst.ground_truth(1);
      const MatchStats stats =
          match_stats(inst.copies[0], inst.copies[1], inst.sigma, truth, pi);
      const std::int64_t direct = overlap(inst.copies[0], inst.copies[1], truth) -
                                  overlap(inst.copies[0], inst.copies[1], pi);
      ok = stats.x == direct;
    }
    check("overlap deficit agrees across both computation paths", ok);
  }

  // Exhaustive and branch-and-bound optima coincide.
  {
    bool ok = true;
    for (int trial = 0; trial < 40 && ok; ++trial) {
      const CorrelatedInstance inst = tiny_instance(rng, 7, 2, 0.5);
      const MatchResult a = exhaustive_match(inst.copies[0], inst.copies[1]);
      const MatchResult b = bnb_match(inst.copies[0], inst.copies[1]);
      ok = a.score == b.score && b.exact && a.pi_hat == b.pi_hat;
    }
    check("exhaustive and branch-and-bound agree on score and tie-break", ok);
  }

  // Worked threshold arithmetic.
  {
    const ThresholdVerdict deg = matching_achievability(1000, 0.05, 0.01, 4, 0.5, 0.05);
    const ThresholdVerdict conv = matching_converse(1000, 0.05, 0.01, 4, 0.5, 0.05);
    const ThresholdVerdict rec = recovery_threshold(4.0, 1.0, 0.5, 2);
    bool ok = close(deg.quantity, 5.0) && !deg.satisfied &&
              close(conv.threshold, 0.95 * std::log(1000.0)) && conv.satisfied &&
              close(rec.quantity, 1.0) && close(rec.threshold, std::sqrt(4.0 / 3.0)) &&
              !rec.satisfied;
    const PgfBoundInputs inputs{std::sqrt(0.2), 1.0, 1.0, 0.1, 0.5, 0.2, 0.05, 10, 40};
    ok = ok && close(pgf_upper_bound(inputs), std::exp(-0.9));
    check("threshold calculators reproduce hand arithmetic", ok);
  }

  // PGF at the ground truth and at s = 0 is exactly one.
  {
    SbmParams params;
    params.n = 4;
    params.k = 2;
    params.p = 0.3;
    params.q = 0.1;
    const CommunityLabels sigma{{0, 0, 1, 1}, 2};
    const Perm id = identity_perm(4);
    Perm swapped = id;
    std::swap(swapped[0], swapped[1]);
    const double theta = std::sqrt(0.3);
    const double at_truth = pgf_exact_tiny(params, sigma, id, id, theta, 1.5, 1.5, 0.6);
    const double at_s0 = pgf_exact_tiny(params, sigma, id, swapped, theta, 1.5, 1.5, 0.0);
    check("pgf is one at the ground truth and at s = 0",
          at_truth == 1.0 && close(at_s0, 1.0));
  }

  // Isolation closed forms against exhaustive enumeration at n = 5.
  {
    const std::vector<std::uint32_t> sizes{3, 2};
    const double p = 0.5, q = 0.2, s = 1.0;
    const CommunityLabels sigma{{0, 0, 0, 1, 1}, 2};
    double mean = 0.0, second = 0.0;
    const PairIndexer indexer(5);
    for (std::uint32_t mask = 0; mask < (1u << 10); ++mask) {
      double prob = 1.0;
      std::uint32_t hit = 0;
      for (std::uint64_t e = 0; e < 10; ++e) {
        auto [i, j] = indexer.pair(e);
        const double edge_prob = s * s * (sigma.sigma[i] == sigma.sigma[j] ? p : q);
        if (mask & (1u << e)) {
          prob *= edge_prob;
          hit |= (1u << i) | (1u << j);
        } else {
          prob *= 1.0 - edge_prob;
        }
      }
      std::uint32_t isolated = 0;
      for (Vertex v = 0; v < 3; ++v) {
        if (!(hit & (1u << v))) ++isolated;
      }
      mean += prob * isolated;
      second += prob * isolated * isolated;
    }
    const IsolationMoments moments = isolation_moments(5, p, q, s, sizes);
    check("isolation moments match full-outcome enumeration at n = 5",
          close(moments.mean, mean, 1e-10) &&
              close(moments.variance, second - mean * mean, 1e-10));
  }

  // Agreement is invariant under global relabeling.
  {
    const CommunityLabels truth{{0, 0, 1, 1}, 2};
    const CommunityLabels flipped{{1, 1, 0, 0}, 2};
    const CommunityLabels off{{0, 1, 1, 1}, 2};
    check("label agreement handles relabeling and partial matches",
          agreement(flipped, truth) == 1.0 && agreement(off, truth) == 0.75);
  }

  // Determinism: a trial reproduces bit-identically from its seed.
  {
    TrialSpec spec;
    spec.params = {8, 2, 0.6, 0.2, LabelMode::UniformRandom};
    spec.label_mode = LabelMode::UniformRandom;
    spec.s = 0.7;
    spec.matcher = MatcherKind::BranchAndBound;
    spec.seed = derive_seed(seed, 0xF00D);
    const TrialRecord first = run_trial(spec);
    const TrialRecord second = run_trial(spec);
    check("trials reproduce bit-identically from their seed",
          first.match_strict == second.match_strict && first.x == second.x &&
              first.t_star_size == second.t_star_size &&
              first.t_star_per_community == second.t_star_per_community);
  }

  out << (all_ok ? "selftest passed" : "selftest FAILED") << "\n";
  return all_ok;
}

}  // namespace csbm
