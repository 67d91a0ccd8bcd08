#include "csbm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csbm {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kTrialStream = 21;
constexpr std::uint64_t kTrialLocalStream = 22;
constexpr std::uint64_t kTrialSpectralStream = 23;
constexpr std::uint64_t kMomentStream = 24;
constexpr std::uint64_t kCouplingDirectStream = 25;
constexpr std::uint64_t kCouplingSplitStream = 26;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

SbmParams TrialSpec::resolve_params() const {
  if (use_scaled) {
    ScaledParams sc = scaled;
    sc.s = s;
    sc.r = r;
    return sc.to_sbm(label_mode);
  }
  SbmParams out = params;
  out.label_mode = label_mode;
  out.validate();
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point_index,
                         std::uint64_t trial_index) {
  return derive_seed(master, kTrialStream, point_index, trial_index);
}

TrialRecord run_trial(const TrialSpec& spec) {
  const auto start = Clock::now();
  TrialRecord record;
  record.spec = spec;
  record.seed = spec.seed;
  try {
    const SbmParams params = spec.resolve_params();
    const CorrelatedInstance instance = make_correlated_instance(
        params, spec.s, spec.r, PermMode::UniformRandom, spec.seed, nullptr,
        spec.condition_on_balanced ? spec.balance_eps : 0.0);
    record.conditioned_on_balanced = instance.conditioned_on_balanced;

    const Graph& a = instance.copies[0];
    bool strict = true, lex = true, all_exact = true;
    std::vector<Perm> estimated;
    estimated.reserve(instance.r() - 1);

    for (std::uint32_t j = 1; j < instance.r(); ++j) {
      const Perm truth = instance.ground_truth(j);
      MatchResult match;
      bool strict_j = false, lex_j = false;
      switch (spec.matcher) {
        case MatcherKind::Exhaustive:
          match = exhaustive_match(a, instance.copies[j], TiePolicy::Lex, spec.exhaustive_cap);
          break;
        case MatcherKind::BranchAndBound:
          // A tie cap of 2 is enough to decide uniqueness of the argmax.
          match = bnb_match(a, instance.copies[j], spec.budget, 2);
          break;
        case MatcherKind::LocalSearch: {
          Rng rng(derive_seed(spec.seed, kTrialLocalStream, j));
          match = seeded_local_search(a, instance.copies[j], {}, spec.local_iters, rng);
          break;
        }
        case MatcherKind::Oracle:
          match.pi_hat = truth;
          match.score = overlap(a, instance.copies[j], truth);
          match.exact = true;
          match.maximizer_count = 1;
          break;
      }
      if (spec.matcher == MatcherKind::Oracle) {
        strict_j = lex_j = true;
      } else {
        strict_j = match.exact && match.maximizer_count == 1 && match.pi_hat == truth;
        lex_j = match.pi_hat == truth;
      }
      strict = strict && strict_j;
      lex = lex && lex_j;
      all_exact = all_exact && match.exact;
      if (j == 1) {
        const MatchStats stats = match_stats(a, instance.copies[1], instance.sigma, truth,
                                             match.pi_hat);
        record.x = stats.x;
        record.y_plus = stats.y_plus;
        record.y_minus = stats.y_minus;
        record.m_plus = stats.m_plus;
        record.m_minus = stats.m_minus;
      }
      estimated.push_back(std::move(match.pi_hat));
    }
    record.match_strict = strict;
    record.match_lex = lex;
    record.match_all_exact = all_exact;

    const IsolationReport isolation =
        isolation_report(a, instance.copies[1], instance.ground_truth(1), instance.sigma);
    record.t_star_size = static_cast<std::uint32_t>(isolation.size());
    record.t_star_per_community = isolation.per_community;

    if (spec.run_recovery) {
      const UnionGraph h =
          union_under(estimated, instance.copies, params.p, params.q, spec.s);
      RecoveryResult rec;
      if (spec.recovery == RecoveryKind::ExactMl) {
        rec = recover_exact_ml(h.h, params.k, h.effective_p, h.effective_q);
      } else {
        Rng rng(derive_seed(spec.seed, kTrialSpectralStream));
        rec = recover_spectral(h.h, params.k, spec.spectral_restarts, rng);
      }
      score_against(rec, instance.sigma);
      record.recovery_agreement = rec.agreement;
      record.recovery_exact = rec.exact_success;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("trial with seed " + std::to_string(spec.seed) +
                             " failed: " + e.what());
  }
  record.wall_ms = ms_since(start);
  return record;
}

std::vector<TrialRecord> run_point_serial(const TrialSpec& base, std::uint64_t point_index,
                                          int trials) {
  std::vector<TrialRecord> records(trials);
  for (int t = 0; t < trials; ++t) {
    TrialSpec spec = base;
    spec.seed = trial_seed(base.seed, point_index, static_cast<std::uint64_t>(t));
    records[t] = run_trial(spec);
  }
  return records;
}

std::vector<TrialRecord> run_point(const TrialSpec& base, std::uint64_t point_index, int trials,
                                   int threads) {
#ifdef _OPENMP
  if (threads > 1) {
    std::vector<TrialRecord> records(trials);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int t = 0; t < trials; ++t) {
      TrialSpec spec = base;
      spec.seed = trial_seed(base.seed, point_index, static_cast<std::uint64_t>(t));
      records[t] = run_trial(spec);
    }
    return records;
  }
#else
  (void)threads;
#endif
  return run_point_serial(base, point_index, trials);
}

Axis axis_from_string(const std::string& name) {
  if (name == "n") return Axis::N;
  if (name == "s") return Axis::S;
  if (name == "p") return Axis::P;
  if (name == "q") return Axis::Q;
  if (name == "k") return Axis::K;
  if (name == "alpha") return Axis::Alpha;
  if (name == "beta") return Axis::Beta;
  if (name == "r") return Axis::R;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::N: return "n";
    case Axis::S: return "s";
    case Axis::P: return "p";
    case Axis::Q: return "q";
    case Axis::K: return "k";
    case Axis::Alpha: return "alpha";
    case Axis::Beta: return "beta";
    case Axis::R: return "r";
  }
  return "?";
}

void apply_axis(TrialSpec& spec, Axis axis, double value) {
  const auto as_count = [&](const char* what) {
    const double rounded = std::round(value);
    if (rounded < 1.0 || std::abs(rounded - value) > 1e-9) {
      throw std::invalid_argument(std::string("axis ") + what + " needs a positive integer value");
    }
    return static_cast<std::uint32_t>(rounded);
  };
  switch (axis) {
    case Axis::N:
      spec.params.n = as_count("n");
      spec.scaled.n = spec.params.n;
      break;
    case Axis::S:
      spec.s = value;
      break;
    case Axis::P:
      if (spec.use_scaled) throw std::invalid_argument("axis p needs direct parameters");
      spec.params.p = value;
      break;
    case Axis::Q:
      if (spec.use_scaled) throw std::invalid_argument("axis q needs direct parameters");
      spec.params.q = value;
      break;
    case Axis::K:
      spec.params.k = as_count("k");
      spec.scaled.k = spec.params.k;
      break;
    case Axis::Alpha:
      if (!spec.use_scaled) throw std::invalid_argument("axis alpha needs scaled parameters");
      spec.scaled.alpha = value;
      break;
    case Axis::Beta:
      if (!spec.use_scaled) throw std::invalid_argument("axis beta needs scaled parameters");
      spec.scaled.beta = value;
      break;
    case Axis::R:
      spec.r = as_count("r");
      break;
  }
}

void SweepSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("SweepSpec: grid must be non-empty");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("SweepSpec: grid must be sorted ascending");
  }
  if (trials_per_point <= 0) throw std::invalid_argument("SweepSpec: trials_per_point > 0");
}

PointSummary summarize_point(const std::string& axis, double value,
                             const std::vector<TrialRecord>& records) {
  PointSummary summary;
  summary.axis = axis;
  summary.value = value;
  summary.trials = static_cast<int>(records.size());
  std::uint64_t strict = 0, lex = 0, recovered = 0;
  bool any_recovery = false;
  double runtime = 0.0;
  for (const TrialRecord& record : records) {
    strict += record.match_strict;
    lex += record.match_lex;
    if (record.recovery_agreement >= 0.0) {
      any_recovery = true;
      recovered += record.recovery_exact;
    }
    runtime += record.wall_ms;
  }
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  summary.match_strict = strict / n;
  summary.match_lex = lex / n;
  summary.recover_exact = any_recovery ? recovered / n : -1.0;
  const WilsonInterval ci = wilson_interval(strict, records.size());
  summary.ci_low = ci.low;
  summary.ci_high = ci.high;
  summary.mean_runtime_ms = runtime / n;
  return summary;
}

SweepResult run_points_serial(const std::string& axis, const std::vector<SweepPoint>& points,
                              int trials_per_point) {
  SweepResult result;
  result.records.resize(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    result.records[p] = run_point_serial(points[p].spec, p, trials_per_point);
    result.points.push_back(summarize_point(axis, points[p].value, result.records[p]));
  }
  return result;
}

SweepResult run_points(const std::string& axis, const std::vector<SweepPoint>& points,
                       int trials_per_point, int threads) {
#ifdef _OPENMP
  if (threads > 1) {
    SweepResult result;
    result.records.assign(points.size(), {});
    for (auto& per_point : result.records) per_point.resize(trials_per_point);
    const std::int64_t total = static_cast<std::int64_t>(points.size()) * trials_per_point;
    // One flat loop over (point, trial) so small grids still fill all workers.
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t idx = 0; idx < total; ++idx) {
      const std::size_t p = static_cast<std::size_t>(idx / trials_per_point);
      const int t = static_cast<int>(idx % trials_per_point);
      TrialSpec spec = points[p].spec;
      spec.seed = trial_seed(points[p].spec.seed, p, static_cast<std::uint64_t>(t));
      result.records[p][t] = run_trial(spec);
    }
    for (std::size_t p = 0; p < points.size(); ++p) {
      result.points.push_back(summarize_point(axis, points[p].value, result.records[p]));
    }
    return result;
  }
#else
  (void)threads;
#endif
  return run_points_serial(axis, points, trials_per_point);
}

namespace {

std::vector<SweepPoint> grid_points(const SweepSpec& sweep) {
  sweep.validate();
  std::vector<SweepPoint> points;
  points.reserve(sweep.grid.size());
  for (double value : sweep.grid) {
    SweepPoint point;
    point.value = value;
    point.spec = sweep.base;
    apply_axis(point.spec, sweep.axis, value);
    points.push_back(std::move(point));
  }
  return points;
}

}  // namespace

SweepResult run_sweep_serial(const SweepSpec& sweep) {
  return run_points_serial(axis_name(sweep.axis), grid_points(sweep), sweep.trials_per_point);
}

SweepResult run_sweep(const SweepSpec& sweep, int threads) {
  return run_points(axis_name(sweep.axis), grid_points(sweep), sweep.trials_per_point, threads);
}

namespace {

std::string csv_impl(const SweepResult& result, bool with_runtime) {
  std::string out = "axis,value,trials,match_strict,match_lex,recover_exact,ci_low,ci_high";
  if (with_runtime) out += ",mean_runtime_ms";
  out += "\n";
  char line[256];
  for (const PointSummary& point : result.points) {
    std::snprintf(line, sizeof(line), "%s,%.10g,%d,%.6f,%.6f,%.6f,%.6f,%.6f",
                  point.axis.c_str(), point.value, point.trials, point.match_strict,
                  point.match_lex, point.recover_exact, point.ci_low, point.ci_high);
    out += line;
    if (with_runtime) {
      std::snprintf(line, sizeof(line), ",%.3f", point.mean_runtime_ms);
      out += line;
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string sweep_csv(const SweepResult& result) { return csv_impl(result, true); }

std::string sweep_csv_stable(const SweepResult& result) { return csv_impl(result, false); }

namespace {

// One isolation trial: sample a parent and two subsampled copies, then count
// the V_1 vertices with no common edge. Returns (|T_1|, vertex 0 isolated).
std::pair<std::uint32_t, bool> isolation_draw(const SbmParams& params,
                                              const CommunityLabels& labels, double s,
                                              std::uint64_t seed) {
  Rng rng(seed);
  const Graph parent = sample_sbm_edges(params, labels, rng);
  const Graph g1 = subsample(parent, s, rng);
  const Graph g2 = subsample(parent, s, rng);
  std::vector<std::uint8_t> hit(params.n, 0);
  g1.for_each_edge([&](Vertex u, Vertex v) {
    if (g2.edge(u, v)) {
      hit[u] = 1;
      hit[v] = 1;
    }
  });
  std::uint32_t isolated = 0;
  for (Vertex i = 0; i < params.n; ++i) {
    if (labels.sigma[i] == 0 && !hit[i]) ++isolated;
  }
  // Vertex 0 is in V_1 under balanced labels.
  return {isolated, hit[0] == 0};
}

MomentCheckReport finish_moment_report(const SbmParams& params,
                                       const std::vector<std::uint32_t>& sizes, double s,
                                       std::uint64_t trials, std::uint64_t sum1,
                                       std::uint64_t sum2, std::uint64_t sum3,
                                       std::uint64_t sum4, std::uint64_t iso0) {
  MomentCheckReport report;
  report.trials = trials;
  report.expected_probability =
      isolation_probability(params.n, params.p, params.q, s, sizes, 0);
  const IsolationMoments moments =
      isolation_moments(params.n, params.p, params.q, s, sizes);
  report.expected_mean = moments.mean;
  report.expected_variance = moments.variance;

  const double n = static_cast<double>(trials);
  const double mean = static_cast<double>(sum1) / n;
  const double raw2 = static_cast<double>(sum2) / n;
  const double raw3 = static_cast<double>(sum3) / n;
  const double raw4 = static_cast<double>(sum4) / n;
  const double var = raw2 - mean * mean;
  const double central4 = raw4 - 4.0 * mean * raw3 + 6.0 * mean * mean * raw2 -
                          3.0 * mean * mean * mean * mean;
  report.empirical_mean = mean;
  report.empirical_variance = var;
  report.empirical_probability = static_cast<double>(iso0) / n;

  const double se_mean = std::sqrt(std::max(report.expected_variance, 1e-300) / n);
  report.mean_sigmas = std::abs(mean - report.expected_mean) / se_mean;
  const double se_var = std::sqrt(std::max(central4 - var * var, 0.0) / n);
  report.variance_sigmas =
      se_var > 0.0 ? std::abs(var - report.expected_variance) / se_var
                   : (var == report.expected_variance ? 0.0 : std::numeric_limits<double>::infinity());
  const double p0 = report.expected_probability;
  const double se_p = std::sqrt(std::max(p0 * (1.0 - p0), 1e-300) / n);
  report.probability_sigmas = std::abs(report.empirical_probability - p0) / se_p;
  return report;
}

}  // namespace

MomentCheckReport moment_check_serial(const SbmParams& params, double s, std::uint64_t trials,
                                      std::uint64_t master_seed) {
  if (params.label_mode != LabelMode::FixedBalanced) {
    throw std::invalid_argument("moment_check: closed forms need fixed-balanced labels");
  }
  params.validate();
  const CommunityLabels labels = balanced_labels(params.n, params.k);
  std::uint64_t sum1 = 0, sum2 = 0, sum3 = 0, sum4 = 0, iso0 = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto [count, zero_isolated] =
        isolation_draw(params, labels, s, derive_seed(master_seed, kMomentStream, t));
    const std::uint64_t c = count;
    sum1 += c;
    sum2 += c * c;
    sum3 += c * c * c;
    sum4 += c * c * c * c;
    iso0 += zero_isolated;
  }
  return finish_moment_report(params, labels.sizes(), s, trials, sum1, sum2, sum3, sum4, iso0);
}

MomentCheckReport moment_check(const SbmParams& params, double s, std::uint64_t trials,
                               std::uint64_t master_seed, int threads) {
#ifdef _OPENMP
  if (threads > 1) {
    if (params.label_mode != LabelMode::FixedBalanced) {
      throw std::invalid_argument("moment_check: closed forms need fixed-balanced labels");
    }
    params.validate();
    const CommunityLabels labels = balanced_labels(params.n, params.k);
    std::uint64_t sum1 = 0, sum2 = 0, sum3 = 0, sum4 = 0, iso0 = 0;
    // Integer accumulators commute, so the reduction is order-independent.
#pragma omp parallel for schedule(static) num_threads(threads) \
    reduction(+ : sum1, sum2, sum3, sum4, iso0)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
      const auto [count, zero_isolated] = isolation_draw(
          params, labels, s, derive_seed(master_seed, kMomentStream, static_cast<std::uint64_t>(t)));
      const std::uint64_t c = count;
      sum1 += c;
      sum2 += c * c;
      sum3 += c * c * c;
      sum4 += c * c * c * c;
      iso0 += zero_isolated;
    }
    return finish_moment_report(params, labels.sizes(), s, trials, sum1, sum2, sum3, sum4, iso0);
  }
#else
  (void)threads;
#endif
  return moment_check_serial(params, s, trials, master_seed);
}

namespace {

// Pattern index over (first, second): (1,1)=0, (1,0)=1, (0,1)=2, (0,0)=3.
void count_patterns(const Graph& first, const Graph& second, const CommunityLabels& labels,
                    std::uint64_t counts[2][4]) {
  const Vertex n = first.vertex_count();
  for (Vertex u = 0; u + 1 < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      const int cls = labels.sigma[u] == labels.sigma[v] ? 0 : 1;
      const int pattern = (first.edge(u, v) ? 0 : 2) + (second.edge(u, v) ? 0 : 1);
      ++counts[cls][pattern];
    }
  }
}

struct CouplingCounts {
  std::uint64_t direct[2][4] = {};
  std::uint64_t split[2][4] = {};
};

void coupling_instance(const SbmParams& params, double s, std::uint64_t master_seed,
                       std::uint64_t index, CouplingCounts& counts) {
  {
    Rng rng(derive_seed(master_seed, kCouplingDirectStream, index));
    const CommunityLabels labels = sample_labels(params, rng);
    const Graph parent = sample_sbm_edges(params, labels, rng);
    const Graph g1 = subsample(parent, s, rng);
    const Graph g2 = subsample(parent, s, rng);
    count_patterns(g1, g2, labels, counts.direct);
  }
  {
    Rng rng(derive_seed(master_seed, kCouplingSplitStream, index));
    SbmParams effective = params;
    const double keep = 1.0 - (1.0 - s) * (1.0 - s);
    effective.p = params.p * keep;
    effective.q = params.q * keep;
    const CommunityLabels labels = sample_labels(effective, rng);
    const Graph h = sample_sbm_edges(effective, labels, rng);
    const auto [h1, h2] = split_pair(h, s, rng);
    count_patterns(h1, h2, labels, counts.split);
  }
}

CouplingReport finish_coupling_report(const CouplingCounts& counts, std::uint64_t pairs_per_arm) {
  CouplingReport report;
  report.pairs_per_arm = pairs_per_arm;
  for (int cls = 0; cls < 2; ++cls) {
    for (int pattern = 0; pattern < 4; ++pattern) {
      report.direct_counts[cls][pattern] = counts.direct[cls][pattern];
      report.split_counts[cls][pattern] = counts.split[cls][pattern];
    }
  }
  const auto stat = [&](int cls) {
    std::vector<std::uint64_t> first(counts.direct[cls], counts.direct[cls] + 4);
    std::vector<std::uint64_t> second(counts.split[cls], counts.split[cls] + 4);
    return chi_square_two_sample(first, second);
  };
  report.chi_square_intra = stat(0);
  report.chi_square_inter = stat(1);
  report.critical_99 = chi_square_crit99(3);
  report.pass = report.chi_square_intra < report.critical_99 &&
                report.chi_square_inter < report.critical_99;
  return report;
}

}  // namespace

CouplingReport coupling_check_serial(const SbmParams& params, double s,
                                     std::uint64_t min_pairs_per_arm, std::uint64_t master_seed) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw std::invalid_argument("coupling_check: split weights need s in (0,1]");
  }
  params.validate();
  const std::uint64_t pairs =
      static_cast<std::uint64_t>(params.n) * (params.n - 1) / 2;
  const std::uint64_t instances = (min_pairs_per_arm + pairs - 1) / pairs;
  CouplingCounts counts;
  for (std::uint64_t i = 0; i < instances; ++i) {
    coupling_instance(params, s, master_seed, i, counts);
  }
  return finish_coupling_report(counts, instances * pairs);
}

CouplingReport coupling_check(const SbmParams& params, double s, std::uint64_t min_pairs_per_arm,
                              std::uint64_t master_seed, int threads) {
#ifdef _OPENMP
  if (threads > 1) {
    if (!(s > 0.0 && s <= 1.0)) {
      throw std::invalid_argument("coupling_check: split weights need s in (0,1]");
    }
    params.validate();
    const std::uint64_t pairs =
        static_cast<std::uint64_t>(params.n) * (params.n - 1) / 2;
    const std::uint64_t instances = (min_pairs_per_arm + pairs - 1) / pairs;
    CouplingCounts counts;
#pragma omp parallel num_threads(threads)
    {
      CouplingCounts local;
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(instances); ++i) {
        coupling_instance(params, s, master_seed, static_cast<std::uint64_t>(i), local);
      }
#pragma omp critical
      {
        for (int cls = 0; cls < 2; ++cls) {
          for (int pattern = 0; pattern < 4; ++pattern) {
            counts.direct[cls][pattern] += local.direct[cls][pattern];
            counts.split[cls][pattern] += local.split[cls][pattern];
          }
        }
      }
    }
    return finish_coupling_report(counts, instances * pairs);
  }
#else
  (void)threads;
#endif
  return coupling_check_serial(params, s, min_pairs_per_arm, master_seed);
}

}  // namespace csbm
