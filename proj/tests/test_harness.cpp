#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "csbm/harness.hpp"
#include "csbm/io.hpp"
#include "csbm/matcher.hpp"

using namespace csbm;

namespace {

TrialSpec small_spec(std::uint64_t seed) {
  TrialSpec spec;
  spec.params = {9, 2, 0.6, 0.2, LabelMode::UniformRandom};
  spec.label_mode = LabelMode::UniformRandom;
  spec.s = 0.7;
  spec.matcher = MatcherKind::BranchAndBound;
  spec.seed = seed;
  return spec;
}

bool records_equal(const TrialRecord& a, const TrialRecord& b) {
  return a.seed == b.seed && a.match_strict == b.match_strict && a.match_lex == b.match_lex &&
         a.x == b.x && a.y_plus == b.y_plus && a.y_minus == b.y_minus && a.m_plus == b.m_plus &&
         a.m_minus == b.m_minus && a.t_star_size == b.t_star_size &&
         a.t_star_per_community == b.t_star_per_community &&
         a.recovery_agreement == b.recovery_agreement && a.recovery_exact == b.recovery_exact;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("a trial reproduces bit-identically from its spec") {
  const TrialSpec spec = small_spec(991);
  const TrialRecord first = run_trial(spec);
  const TrialRecord second = run_trial(spec);
  CHECK(records_equal(first, second));
}

TEST_CASE("s = 0 never succeeds under the strict definition") {
  TrialSpec spec = small_spec(992);
  spec.s = 0.0;
  const TrialRecord record = run_trial(spec);
  CHECK_FALSE(record.match_strict);
  CHECK(record.t_star_size == spec.params.n);
}

TEST_CASE("s = 1 succeeds strictly exactly when the parent is asymmetric") {
  for (int i = 0; i < 6; ++i) {
    TrialSpec spec = small_spec(derive_seed(993, 0, i));
    spec.params.n = 8;
    spec.params.p = 0.5;
    spec.params.q = 0.25;
    spec.s = 1.0;
    spec.matcher = MatcherKind::Exhaustive;
    spec.exhaustive_cap = 8;
    const TrialRecord record = run_trial(spec);

    // Automorphism census of the parent regenerated from the same seed.
    const SbmParams params = spec.resolve_params();
    const auto inst = make_correlated_instance(params, 1.0, 2, PermMode::UniformRandom, spec.seed);
    std::uint64_t autos = 0;
    Perm pi = identity_perm(8);
    do {
      if (overlap(inst.parent, inst.parent, pi) ==
          static_cast<std::int64_t>(inst.parent.edge_count())) {
        ++autos;
      }
    } while (std::next_permutation(pi.begin(), pi.end()));
    CHECK(record.match_strict == (autos == 1));
    CHECK(record.x == 0);
  }
}

TEST_CASE("serial and parallel points produce identical records") {
  const TrialSpec spec = small_spec(994);
  const auto serial = run_point_serial(spec, 3, 24);
  const auto parallel = run_point(spec, 3, 24, 2);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(records_equal(serial[i], parallel[i]));
  }
}

TEST_CASE("serial and parallel sweeps emit identical stable CSV") {
  SweepSpec sweep;
  sweep.axis = Axis::S;
  sweep.grid = {0.4, 0.8};
  sweep.trials_per_point = 16;
  sweep.base = small_spec(995);
  const SweepResult serial = run_sweep_serial(sweep);
  const SweepResult parallel = run_sweep(sweep, 2);
  CHECK(sweep_csv_stable(serial) == sweep_csv_stable(parallel));
  CHECK(serial.points.size() == 2);
  CHECK(serial.points[0].trials == 16);
}

TEST_CASE("sweep validation and the degenerate single-point grid") {
  SweepSpec sweep;
  sweep.axis = Axis::S;
  sweep.grid = {};
  sweep.base = small_spec(996);
  CHECK_THROWS_AS(sweep.validate(), std::invalid_argument);
  sweep.grid = {0.9, 0.3};
  CHECK_THROWS_AS(sweep.validate(), std::invalid_argument);
  sweep.grid = {0.6};
  sweep.trials_per_point = 8;
  const SweepResult result = run_sweep(sweep, 2);
  CHECK(result.points.size() == 1);
  const std::string csv = sweep_csv(result);
  CHECK(csv.find("axis,value,trials,match_strict,match_lex,recover_exact,ci_low,ci_high,"
                 "mean_runtime_ms") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
}

TEST_CASE("success rates rise with the subsampling probability") {
  SweepSpec sweep;
  sweep.axis = Axis::S;
  sweep.grid = {0.35, 0.65, 0.95};
  sweep.trials_per_point = 60;
  sweep.base = small_spec(997);
  sweep.base.params = {10, 2, 0.55, 0.15, LabelMode::UniformRandom};
  const SweepResult result = run_sweep(sweep, 2);
  for (std::size_t i = 0; i + 1 < result.points.size(); ++i) {
    const bool monotone = result.points[i + 1].match_strict >= result.points[i].match_strict;
    const bool ci_overlap = result.points[i + 1].ci_high >= result.points[i].ci_low;
    CHECK((monotone || ci_overlap));
  }
}

TEST_CASE("axis application touches the right knob") {
  TrialSpec spec = small_spec(1);
  apply_axis(spec, Axis::N, 20);
  CHECK(spec.params.n == 20);
  apply_axis(spec, Axis::K, 4);
  CHECK(spec.params.k == 4);
  apply_axis(spec, Axis::P, 0.33);
  CHECK(spec.params.p == 0.33);
  apply_axis(spec, Axis::R, 3);
  CHECK(spec.r == 3);
  CHECK_THROWS_AS(apply_axis(spec, Axis::Alpha, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(apply_axis(spec, Axis::N, 2.5), std::invalid_argument);
  spec.use_scaled = true;
  apply_axis(spec, Axis::Alpha, 5.0);
  CHECK(spec.scaled.alpha == 5.0);
  CHECK_THROWS_AS(apply_axis(spec, Axis::P, 0.5), std::invalid_argument);
}

TEST_CASE("moment check is exact at the frozen ends") {
  SUBCASE("s = 0 freezes |T_1| at the community size") {
    SbmParams params{20, 2, 0.5, 0.1, LabelMode::FixedBalanced};
    const MomentCheckReport report = moment_check(params, 0.0, 500, 31, 2);
    CHECK(report.empirical_mean == 10.0);
    CHECK(report.empirical_variance == 0.0);
    CHECK(report.expected_variance == 0.0);
    CHECK(report.empirical_probability == 1.0);
  }
  SUBCASE("p = q = 1 at s = 1 isolates nothing") {
    SbmParams params{12, 2, 1.0, 1.0, LabelMode::FixedBalanced};
    const MomentCheckReport report = moment_check(params, 1.0, 200, 32, 2);
    CHECK(report.empirical_mean == 0.0);
    CHECK(report.expected_mean == 0.0);
  }
  SUBCASE("uniform labels are rejected") {
    SbmParams params{12, 2, 0.5, 0.1, LabelMode::UniformRandom};
    CHECK_THROWS_AS(moment_check(params, 0.5, 10, 33, 1), std::invalid_argument);
  }
}

TEST_CASE("moment check matches the closed forms at moderate size") {
  SbmParams params{40, 2, 0.15, 0.05, LabelMode::FixedBalanced};
  const MomentCheckReport report = moment_check(params, 0.7, 4000, 34, 2);
  CHECK(report.mean_sigmas <= 4.0);
  CHECK(report.variance_sigmas <= 4.0);
  CHECK(report.probability_sigmas <= 4.0);
  // Serial reference produces the identical report.
  const MomentCheckReport serial = moment_check_serial(params, 0.7, 4000, 34);
  CHECK(serial.empirical_mean == report.empirical_mean);
  CHECK(serial.empirical_variance == report.empirical_variance);
  CHECK(serial.empirical_probability == report.empirical_probability);
}

TEST_CASE("coupling check trivial ends and serial/parallel equality") {
  SUBCASE("p = 0 yields identical all-empty tables") {
    SbmParams params{30, 2, 0.0, 0.0, LabelMode::UniformRandom};
    const CouplingReport report = coupling_check(params, 0.5, 2000, 35, 2);
    CHECK(report.chi_square_intra == 0.0);
    CHECK(report.chi_square_inter == 0.0);
    CHECK(report.pass);
  }
  SUBCASE("s = 1 passes homogeneity") {
    SbmParams params{40, 2, 0.4, 0.1, LabelMode::UniformRandom};
    const CouplingReport report = coupling_check(params, 0.5, 20000, 36, 2);
    CHECK(report.pass);
  }
  SUBCASE("serial reference matches the parallel kernel") {
    SbmParams params{30, 2, 0.3, 0.1, LabelMode::UniformRandom};
    const CouplingReport serial = coupling_check_serial(params, 0.5, 5000, 37);
    const CouplingReport parallel = coupling_check(params, 0.5, 5000, 37, 2);
    for (int cls = 0; cls < 2; ++cls) {
      for (int pattern = 0; pattern < 4; ++pattern) {
        CHECK(serial.direct_counts[cls][pattern] == parallel.direct_counts[cls][pattern]);
        CHECK(serial.split_counts[cls][pattern] == parallel.split_counts[cls][pattern]);
      }
    }
  }
}

TEST_CASE("Wilson intervals contain the point estimate inside [0, 1]") {
  for (std::uint64_t n : {1ull, 10ull, 200ull}) {
    for (std::uint64_t successes = 0; successes <= n; successes += std::max<std::uint64_t>(1, n / 5)) {
      const WilsonInterval ci = wilson_interval(successes, n);
      const double rate = static_cast<double>(successes) / n;
      CHECK(ci.low >= 0.0);
      CHECK(ci.high <= 1.0);
      CHECK(ci.low <= rate + 1e-12);
      CHECK(ci.high >= rate - 1e-12);
    }
  }
}

TEST_CASE("trial records serialize with a full spec echo") {
  TrialSpec spec = small_spec(998);
  spec.run_recovery = true;
  spec.recovery = RecoveryKind::ExactMl;
  const TrialRecord record = run_trial(spec);
  const Json j = trial_record_to_json(record);
  CHECK(j.at("seed").get<std::uint64_t>() == 998);
  CHECK(j.at("spec").at("n").get<int>() == 9);
  CHECK(j.at("spec").at("matcher").get<std::string>() == "bnb");
  CHECK(j.at("recovery_agreement").get<double>() >= 0.0);
}

TEST_SUITE_END();
