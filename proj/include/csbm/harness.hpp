#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csbm/matcher.hpp"
#include "csbm/model.hpp"
#include "csbm/recovery.hpp"
#include "csbm/stats.hpp"
#include "csbm/theory.hpp"

namespace csbm {

// Everything that determines one Monte Carlo trial. Records are reproducible
// from the spec alone (wall time aside).
struct TrialSpec {
  bool use_scaled = false;
  SbmParams params;     // when !use_scaled
  ScaledParams scaled;  // when use_scaled (its s/r fields are ignored)
  // Authoritative label mode for either parameter form.
  LabelMode label_mode = LabelMode::UniformRandom;
  double s = 1.0;
  std::uint32_t r = 2;

  MatcherKind matcher = MatcherKind::BranchAndBound;
  std::int64_t budget = -1;
  Vertex exhaustive_cap = 10;
  int local_iters = 64;

  bool run_recovery = false;
  RecoveryKind recovery = RecoveryKind::Spectral;
  int spectral_restarts = 8;

  bool condition_on_balanced = false;
  double balance_eps = 0.5;

  std::uint64_t seed = 0;

  SbmParams resolve_params() const;
};

struct TrialRecord {
  TrialSpec spec;
  std::uint64_t seed = 0;
  // Strict success: every copy's ground truth is the unique maximizer.
  // Lex success: the lexicographic tie-break returns the ground truth.
  bool match_strict = false;
  bool match_lex = false;
  bool match_all_exact = false;  // solver proved optimality on every copy
  std::int64_t x = 0;
  std::int64_t y_plus = 0;
  std::int64_t y_minus = 0;
  std::int64_t m_plus = 0;
  std::int64_t m_minus = 0;
  std::uint32_t t_star_size = 0;
  std::vector<std::uint32_t> t_star_per_community;
  double recovery_agreement = -1.0;
  bool recovery_exact = false;
  bool conditioned_on_balanced = false;
  double wall_ms = 0.0;
};

TrialRecord run_trial(const TrialSpec& spec);

// Per-trial seeds are hash(master seed, point index, trial index), so the
// records do not depend on scheduling.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point_index,
                         std::uint64_t trial_index);

// Serial reference for the trial kernel, and the OpenMP version. Both return
// identical records for the same inputs.
std::vector<TrialRecord> run_point_serial(const TrialSpec& base, std::uint64_t point_index,
                                          int trials);
std::vector<TrialRecord> run_point(const TrialSpec& base, std::uint64_t point_index, int trials,
                                   int threads);

enum class Axis { N, S, P, Q, K, Alpha, Beta, R };

Axis axis_from_string(const std::string& name);
std::string axis_name(Axis axis);
void apply_axis(TrialSpec& spec, Axis axis, double value);

struct SweepSpec {
  Axis axis = Axis::S;
  std::vector<double> grid;
  int trials_per_point = 200;
  TrialSpec base;

  void validate() const;  // grid non-empty and sorted
};

struct PointSummary {
  std::string axis;
  double value = 0.0;
  int trials = 0;
  double match_strict = 0.0;
  double match_lex = 0.0;
  double recover_exact = -1.0;  // -1 when recovery was not run
  double ci_low = 0.0;          // Wilson 95% interval on the strict rate
  double ci_high = 1.0;
  double mean_runtime_ms = 0.0;
};

struct SweepResult {
  std::vector<PointSummary> points;
  std::vector<std::vector<TrialRecord>> records;  // per point, in trial order
};

PointSummary summarize_point(const std::string& axis, double value,
                             const std::vector<TrialRecord>& records);

// Arbitrary per-point specs (used for derived sweeps such as a degree-ratio
// grid where several parameters move together).
struct SweepPoint {
  double value = 0.0;
  TrialSpec spec;
};

SweepResult run_points_serial(const std::string& axis, const std::vector<SweepPoint>& points,
                              int trials_per_point);
SweepResult run_points(const std::string& axis, const std::vector<SweepPoint>& points,
                       int trials_per_point, int threads);

SweepResult run_sweep_serial(const SweepSpec& sweep);
SweepResult run_sweep(const SweepSpec& sweep, int threads);

// CSV with header axis,value,trials,match_strict,match_lex,recover_exact,
// ci_low,ci_high,mean_runtime_ms. Everything except mean_runtime_ms is
// deterministic for a given sweep spec.
std::string sweep_csv(const SweepResult& result);
// The same table with the runtime column removed, for determinism checks.
std::string sweep_csv_stable(const SweepResult& result);

// Empirical isolation statistics of |T_1| against the closed forms.
// Requires fixed-balanced labels so the conditional forms are constants.
struct MomentCheckReport {
  std::uint64_t trials = 0;
  double expected_probability = 0.0;  // P(i in T_1)
  double expected_mean = 0.0;
  double expected_variance = 0.0;
  double empirical_probability = 0.0;  // frequency for a fixed vertex of V_1
  double empirical_mean = 0.0;
  double empirical_variance = 0.0;
  double mean_sigmas = 0.0;         // |emp - exp| in units of SE(mean)
  double variance_sigmas = 0.0;     // same for the variance, via moments
  double probability_sigmas = 0.0;  // Bernoulli SE for the fixed vertex
};

MomentCheckReport moment_check_serial(const SbmParams& params, double s, std::uint64_t trials,
                                      std::uint64_t master_seed);
MomentCheckReport moment_check(const SbmParams& params, double s, std::uint64_t trials,
                               std::uint64_t master_seed, int threads);

// Two-sample comparison between directly generated correlated copies and the
// split of a union-law SBM, per pair class. Patterns are indexed
// (1,1), (1,0), (0,1), (0,0).
struct CouplingReport {
  std::uint64_t pairs_per_arm = 0;
  std::uint64_t direct_counts[2][4] = {};
  std::uint64_t split_counts[2][4] = {};
  double chi_square_intra = 0.0;
  double chi_square_inter = 0.0;
  double critical_99 = 0.0;
  bool pass = false;
};

CouplingReport coupling_check_serial(const SbmParams& params, double s,
                                     std::uint64_t min_pairs_per_arm, std::uint64_t master_seed);
CouplingReport coupling_check(const SbmParams& params, double s, std::uint64_t min_pairs_per_arm,
                              std::uint64_t master_seed, int threads);

}  // namespace csbm
