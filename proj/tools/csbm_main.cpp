#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "csbm/harness.hpp"
#include "csbm/io.hpp"
#include "csbm/selftest.hpp"

namespace {

using namespace csbm;

std::uint64_t fresh_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

// Ensures a seed exists; interactive subcommands get a printed random one.
std::uint64_t ensure_seed(CLI::Option* opt, std::uint64_t value) {
  if (opt->count() > 0) return value;
  const std::uint64_t seed = fresh_seed();
  std::cerr << "seed: " << seed << "\n";
  return seed;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(out_path, text);
  }
}

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct GenArgs {
  std::uint32_t n = 20, k = 2, r = 2;
  double p = 0.5, q = 0.1, s = 1.0;
  double alpha = 0.0, beta = 0.0;
  bool scaled = false, balanced = false, identity_perm_mode = false, json = false;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& args, CLI::Option* seed_opt) {
  const std::uint64_t seed = ensure_seed(seed_opt, args.seed);
  CorrelatedInstance instance;
  const PermMode mode = args.identity_perm_mode ? PermMode::Identity : PermMode::UniformRandom;
  if (args.scaled) {
    ScaledParams scaled{args.alpha, args.beta, args.k, args.n, args.s, args.r};
    instance = make_correlated_instance(scaled, mode, seed);
  } else {
    SbmParams params{args.n, args.k, args.p, args.q,
                     args.balanced ? LabelMode::FixedBalanced : LabelMode::UniformRandom};
    instance = make_correlated_instance(params, args.s, args.r, mode, seed);
  }
  if (args.json) {
    emit(instance_to_json(instance).dump(2), args.out);
  } else {
    emit(to_edge_list(instance.parent, instance.sigma), args.out);
  }
  return 0;
}

struct MatchArgs {
  std::string in, out, solver = "bnb", tie = "lex";
  std::int64_t budget = -1;
  Vertex cap = 10;
  int iters = 64;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_match(const MatchArgs& args, CLI::Option* seed_opt) {
  const CorrelatedInstance instance = instance_from_json(Json::parse(read_text_file(args.in)));
  const Graph& a = instance.copies[0];
  const Graph& b = instance.copies[1];
  const TiePolicy tie = args.tie == "all" ? TiePolicy::CollectAll : TiePolicy::Lex;

  MatchResult result;
  if (args.solver == "exhaustive") {
    result = exhaustive_match(a, b, tie, args.cap);
  } else if (args.solver == "bnb") {
    result = bnb_match(a, b, args.budget, 100, tie);
  } else if (args.solver == "local") {
    Rng rng(ensure_seed(seed_opt, args.seed));
    result = seeded_local_search(a, b, {}, args.iters, rng);
  } else {
    throw std::invalid_argument("--solver must be one of exhaustive, bnb, local");
  }
  attach_ground_truth_stats(result, a, b, instance.sigma, instance.ground_truth(1));

  Json j = match_result_to_json(result);
  j["ground_truth_recovered"] = result.pi_hat == instance.ground_truth(1);
  j["isolation"] =
      isolation_report_to_json(isolation_report(a, b, result.pi_hat, instance.sigma));
  emit(j.dump(2), args.out);
  return 0;
}

struct RecoverArgs {
  std::string in, out, method = "spectral", graph = "union";
  int restarts = 8;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_recover(const RecoverArgs& args, CLI::Option* seed_opt) {
  const CorrelatedInstance instance = instance_from_json(Json::parse(read_text_file(args.in)));
  Graph target;
  double eff_p = 0.0, eff_q = 0.0;
  if (args.graph == "union") {
    const UnionGraph h = union_under(instance.perms, instance.copies, instance.params.p,
                                     instance.params.q, instance.s);
    target = h.h;
    eff_p = h.effective_p;
    eff_q = h.effective_q;
  } else if (args.graph == "g1") {
    target = instance.copies[0];
    eff_p = instance.params.p * instance.s;
    eff_q = instance.params.q * instance.s;
  } else {
    throw std::invalid_argument("--graph must be union or g1");
  }

  RecoveryResult result;
  if (args.method == "exact-ml") {
    result = recover_exact_ml(target, instance.params.k, eff_p, eff_q);
  } else if (args.method == "spectral") {
    Rng rng(ensure_seed(seed_opt, args.seed));
    result = recover_spectral(target, instance.params.k, args.restarts, rng);
  } else {
    throw std::invalid_argument("--method must be exact-ml or spectral");
  }
  score_against(result, instance.sigma);
  emit(recovery_result_to_json(result, eff_p, eff_q).dump(2), args.out);
  return 0;
}

struct PipelineArgs {
  std::string in, out, solver = "bnb", method = "spectral";
  std::int64_t budget = -1;
  int restarts = 8;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_pipeline(const PipelineArgs& args, CLI::Option* seed_opt) {
  const CorrelatedInstance instance = instance_from_json(Json::parse(read_text_file(args.in)));
  PipelineConfig config;
  config.budget = args.budget;
  config.spectral_restarts = args.restarts;
  config.seed = ensure_seed(seed_opt, args.seed);
  const PipelineResult result = two_step_pipeline(instance, matcher_kind_from_string(args.solver),
                                                  recovery_kind_from_string(args.method), config);
  emit(pipeline_result_to_json(result).dump(2), args.out);
  return 0;
}

struct ThresholdArgs {
  std::uint32_t n = 0, k = 1, r = 2;
  double p = 0.0, q = 0.0, s = 1.0, eps = 0.1;
  double alpha = 0.0, beta = 0.0;
  double big_c = 1.0, small_c = 1.0 / 3.0, t = 0.1;
  bool json = false;
  std::string out;
};

std::vector<ThresholdVerdict> threshold_verdicts(const ThresholdArgs& args, bool with_matching,
                                                 bool with_scaled) {
  std::vector<ThresholdVerdict> verdicts;
  if (with_matching) {
    verdicts.push_back(matching_achievability(args.n, args.p, args.q, args.k, args.s, args.eps));
    verdicts.push_back(matching_k_condition(args.n, args.p, args.q, args.k, args.s, args.big_c,
                                            args.small_c));
    verdicts.push_back(matching_converse(args.n, args.p, args.q, args.k, args.s, args.eps));
    verdicts.push_back(converse_k_condition(args.n, args.k, args.t));
  }
  if (with_scaled) {
    verdicts.push_back(recovery_threshold(args.alpha, args.beta, args.s, args.r));
    verdicts.push_back(matching_side_condition(args.alpha, args.beta, args.k, args.s));
    verdicts.push_back(conjecture_condition(args.alpha, args.beta, args.k, args.s));
  }
  return verdicts;
}

int run_threshold(const ThresholdArgs& args, bool with_matching, bool with_scaled) {
  if (!with_matching && !with_scaled) {
    throw std::invalid_argument("threshold: supply --n/--p/--q or --alpha/--beta");
  }
  const auto verdicts = threshold_verdicts(args, with_matching, with_scaled);
  if (args.json) {
    Json j = Json::array();
    for (const auto& verdict : verdicts) j.push_back(threshold_verdict_to_json(verdict));
    emit(j.dump(2), args.out);
    return 0;
  }
  std::ostringstream table;
  char line[256];
  std::snprintf(line, sizeof(line), "%-30s %14s %14s %14s  %s\n", "regime", "quantity",
                "threshold", "margin", "satisfied");
  table << line;
  for (const auto& verdict : verdicts) {
    std::snprintf(line, sizeof(line), "%-30s %14.6g %14.6g %14.6g  %s%s\n",
                  verdict.regime_tag.c_str(), verdict.quantity, verdict.threshold, verdict.margin,
                  verdict.satisfied ? "yes" : "no",
                  verdict.uses_free_constants ? "  (free constants)" : "");
    table << line;
  }
  emit(table.str(), args.out);
  return 0;
}

struct SweepArgs {
  std::string axis = "s";
  std::string grid_text;
  int trials = 200;
  std::uint32_t n = 12, k = 2, r = 2;
  double p = 0.5, q = 0.1, s = 1.0;
  double alpha = 0.0, beta = 0.0;
  bool scaled = false, balanced = false;
  std::string matcher = "bnb", recovery = "none";
  std::int64_t budget = -1;
  int restarts = 8;
  bool condition_balanced = false;
  double balance_eps = 0.5;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out, jsonl, config;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) grid.push_back(std::stod(item));
  }
  return grid;
}

// Plain key=value config; '#' starts a comment. CLI flags take precedence.
std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> values;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      const auto last = s.find_last_not_of(" \t\r");
      return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) values[key] = value;
  }
  return values;
}

int run_sweep_cmd(SweepArgs& args, CLI::App* cmd) {
  if (!args.config.empty()) {
    const auto values = parse_config(read_text_file(args.config));
    const auto take = [&](const char* flag, const char* key, auto&& apply) {
      if (cmd->get_option(flag)->count() == 0) {
        const auto it = values.find(key);
        if (it != values.end()) apply(it->second);
      }
    };
    take("--axis", "axis", [&](const std::string& v) { args.axis = v; });
    take("--grid", "grid", [&](const std::string& v) { args.grid_text = v; });
    take("--trials", "trials", [&](const std::string& v) { args.trials = std::stoi(v); });
    take("--n", "n", [&](const std::string& v) { args.n = std::stoul(v); });
    take("--k", "k", [&](const std::string& v) { args.k = std::stoul(v); });
    take("--p", "p", [&](const std::string& v) { args.p = std::stod(v); });
    take("--q", "q", [&](const std::string& v) { args.q = std::stod(v); });
    take("--alpha", "alpha", [&](const std::string& v) { args.alpha = std::stod(v); });
    take("--beta", "beta", [&](const std::string& v) { args.beta = std::stod(v); });
    take("--scaled", "scaled", [&](const std::string& v) { args.scaled = v == "true" || v == "1"; });
    take("--balanced", "balanced",
         [&](const std::string& v) { args.balanced = v == "true" || v == "1"; });
    take("--s", "s", [&](const std::string& v) { args.s = std::stod(v); });
    take("--r", "r", [&](const std::string& v) { args.r = std::stoul(v); });
    take("--matcher", "matcher", [&](const std::string& v) { args.matcher = v; });
    take("--budget", "budget", [&](const std::string& v) { args.budget = std::stoll(v); });
    take("--recovery", "recovery", [&](const std::string& v) { args.recovery = v; });
    take("--restarts", "restarts", [&](const std::string& v) { args.restarts = std::stoi(v); });
    take("--condition-balanced", "condition_balanced",
         [&](const std::string& v) { args.condition_balanced = v == "true" || v == "1"; });
    take("--balance-eps", "balance_eps",
         [&](const std::string& v) { args.balance_eps = std::stod(v); });
    take("--threads", "threads", [&](const std::string& v) { args.threads = std::stoi(v); });
    take("--out", "out", [&](const std::string& v) { args.out = v; });
    take("--jsonl", "jsonl", [&](const std::string& v) { args.jsonl = v; });
  }

  SweepSpec sweep;
  sweep.axis = axis_from_string(args.axis);
  sweep.grid = parse_grid(args.grid_text);
  sweep.trials_per_point = args.trials;
  sweep.base.use_scaled = args.scaled;
  sweep.base.params = {args.n, args.k, args.p, args.q, LabelMode::UniformRandom};
  sweep.base.scaled = {args.alpha, args.beta, args.k, args.n, args.s, args.r};
  sweep.base.label_mode = args.balanced ? LabelMode::FixedBalanced : LabelMode::UniformRandom;
  sweep.base.s = args.s;
  sweep.base.r = args.r;
  sweep.base.matcher = matcher_kind_from_string(args.matcher);
  sweep.base.budget = args.budget;
  sweep.base.run_recovery = args.recovery != "none";
  if (sweep.base.run_recovery) sweep.base.recovery = recovery_kind_from_string(args.recovery);
  sweep.base.spectral_restarts = args.restarts;
  sweep.base.condition_on_balanced = args.condition_balanced;
  sweep.base.balance_eps = args.balance_eps;
  sweep.base.seed = args.seed;

  const int threads = args.threads > 0 ? args.threads : default_threads();
  const SweepResult result = run_sweep(sweep, threads);
  emit(sweep_csv(result), args.out);
  if (!args.jsonl.empty()) {
    std::string lines;
    for (const auto& point : result.records) {
      for (const TrialRecord& record : point) {
        lines += trial_record_to_json(record).dump();
        lines += '\n';
      }
    }
    write_text_file(args.jsonl, lines);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"correlated SBM generation, matching, clustering and threshold laboratory"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "sample a correlated SBM instance");
  gen->add_option("--n", gen_args.n, "vertex count");
  gen->add_option("--k", gen_args.k, "community count");
  gen->add_option("--p", gen_args.p, "intra-community edge probability");
  gen->add_option("--q", gen_args.q, "inter-community edge probability");
  gen->add_option("--alpha", gen_args.alpha, "scaled intra coefficient");
  gen->add_option("--beta", gen_args.beta, "scaled inter coefficient");
  gen->add_flag("--scaled", gen_args.scaled, "interpret parameters as alpha/beta scaled form");
  gen->add_flag("--balanced", gen_args.balanced, "fixed balanced labels instead of uniform");
  gen->add_option("--s", gen_args.s, "edge subsampling probability");
  gen->add_option("--r", gen_args.r, "number of correlated copies");
  gen->add_flag("--identity-perms", gen_args.identity_perm_mode,
                "keep copies unpermuted (identity ground truth)");
  CLI::Option* gen_seed = gen->add_option("--seed", gen_args.seed, "master seed");
  gen->add_flag("--json", gen_args.json, "write the full instance JSON instead of an edge list");
  gen->add_option("--out", gen_args.out, "output path (default stdout)");

  MatchArgs match_args;
  CLI::App* match = app.add_subcommand("match", "align two copies of an instance");
  match->add_option("--in", match_args.in, "instance JSON path")->required();
  match->add_option("--solver", match_args.solver, "exhaustive | bnb | local");
  match->add_option("--budget", match_args.budget, "node budget for bnb (-1 unlimited)");
  match->add_option("--tie", match_args.tie, "lex | all");
  match->add_option("--cap", match_args.cap, "exhaustive size cap");
  match->add_option("--iters", match_args.iters, "local search sweeps");
  CLI::Option* match_seed = match->add_option("--seed", match_args.seed, "seed for local search");
  match->add_flag("--json", match_args.json, "machine-readable output (always JSON)");
  match->add_option("--out", match_args.out, "output path (default stdout)");

  RecoverArgs recover_args;
  CLI::App* recover = app.add_subcommand("recover", "recover communities from an instance");
  recover->add_option("--in", recover_args.in, "instance JSON path")->required();
  recover->add_option("--method", recover_args.method, "exact-ml | spectral");
  recover->add_option("--graph", recover_args.graph, "union | g1");
  recover->add_option("--restarts", recover_args.restarts, "spectral k-means restarts");
  CLI::Option* recover_seed = recover->add_option("--seed", recover_args.seed, "spectral seed");
  recover->add_flag("--json", recover_args.json, "machine-readable output (always JSON)");
  recover->add_option("--out", recover_args.out, "output path (default stdout)");

  PipelineArgs pipeline_args;
  CLI::App* pipeline = app.add_subcommand("pipeline", "match copies, then recover on the union");
  pipeline->add_option("--in", pipeline_args.in, "instance JSON path")->required();
  pipeline->add_option("--solver", pipeline_args.solver, "exhaustive | bnb | local | oracle");
  pipeline->add_option("--method", pipeline_args.method, "exact-ml | spectral");
  pipeline->add_option("--budget", pipeline_args.budget, "node budget for bnb");
  pipeline->add_option("--restarts", pipeline_args.restarts, "spectral k-means restarts");
  CLI::Option* pipeline_seed = pipeline->add_option("--seed", pipeline_args.seed, "pipeline seed");
  pipeline->add_flag("--json", pipeline_args.json, "machine-readable output (always JSON)");
  pipeline->add_option("--out", pipeline_args.out, "output path (default stdout)");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo success-rate sweep");
  sweep->add_option("--axis", sweep_args.axis, "n | s | p | q | k | alpha | beta | r");
  sweep->add_option("--grid", sweep_args.grid_text, "comma-separated grid values");
  sweep->add_option("--trials", sweep_args.trials, "trials per grid point");
  sweep->add_option("--n", sweep_args.n, "vertex count");
  sweep->add_option("--k", sweep_args.k, "community count");
  sweep->add_option("--p", sweep_args.p, "intra probability");
  sweep->add_option("--q", sweep_args.q, "inter probability");
  sweep->add_option("--alpha", sweep_args.alpha, "scaled intra coefficient");
  sweep->add_option("--beta", sweep_args.beta, "scaled inter coefficient");
  sweep->add_flag("--scaled", sweep_args.scaled, "use the scaled parametrization");
  sweep->add_flag("--balanced", sweep_args.balanced, "fixed balanced labels");
  sweep->add_option("--s", sweep_args.s, "subsampling probability");
  sweep->add_option("--r", sweep_args.r, "number of copies");
  sweep->add_option("--matcher", sweep_args.matcher, "exhaustive | bnb | local | oracle");
  sweep->add_option("--budget", sweep_args.budget, "bnb node budget");
  sweep->add_option("--recovery", sweep_args.recovery, "none | exact-ml | spectral");
  sweep->add_option("--restarts", sweep_args.restarts, "spectral restarts");
  sweep->add_flag("--condition-balanced", sweep_args.condition_balanced,
                  "reject-sample labels until the balancedness event holds");
  sweep->add_option("--balance-eps", sweep_args.balance_eps, "balancedness epsilon");
  CLI::Option* sweep_seed =
      sweep->add_option("--seed", sweep_args.seed, "master seed (required)")->required();
  sweep->add_option("--threads", sweep_args.threads, "worker threads (default: hardware)");
  sweep->add_option("--out", sweep_args.out, "CSV output path (default stdout)");
  sweep->add_option("--jsonl", sweep_args.jsonl, "optional JSONL path with full trial records");
  sweep->add_option("--config", sweep_args.config, "key=value config file (flags override)");
  (void)sweep_seed;

  ThresholdArgs threshold_args;
  CLI::App* threshold = app.add_subcommand("threshold", "evaluate threshold conditions");
  CLI::Option* th_n = threshold->add_option("--n", threshold_args.n, "vertex count");
  threshold->add_option("--k", threshold_args.k, "community count");
  CLI::Option* th_p = threshold->add_option("--p", threshold_args.p, "intra probability");
  threshold->add_option("--q", threshold_args.q, "inter probability");
  CLI::Option* th_alpha = threshold->add_option("--alpha", threshold_args.alpha, "scaled intra");
  threshold->add_option("--beta", threshold_args.beta, "scaled inter");
  threshold->add_option("--s", threshold_args.s, "subsampling probability");
  threshold->add_option("--r", threshold_args.r, "number of copies");
  threshold->add_option("--eps", threshold_args.eps, "epsilon in the degree conditions");
  threshold->add_option("--big-c", threshold_args.big_c, "constant C (not paper-specified)");
  threshold->add_option("--small-c", threshold_args.small_c, "constant c (not paper-specified)");
  threshold->add_option("--t", threshold_args.t, "constant t (not paper-specified)");
  threshold->add_flag("--json", threshold_args.json, "JSON output");
  threshold->add_option("--out", threshold_args.out, "output path (default stdout)");

  std::uint64_t selftest_seed = 0;
  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle suite");
  selftest->add_option("--seed", selftest_seed, "seed (required)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return run_gen(gen_args, gen_seed);
    if (match->parsed()) return run_match(match_args, match_seed);
    if (recover->parsed()) return run_recover(recover_args, recover_seed);
    if (pipeline->parsed()) return run_pipeline(pipeline_args, pipeline_seed);
    if (sweep->parsed()) return run_sweep_cmd(sweep_args, sweep);
    if (threshold->parsed()) {
      const bool with_matching = th_n->count() > 0 && th_p->count() > 0;
      const bool with_scaled = th_alpha->count() > 0;
      (void)th_p;
      return run_threshold(threshold_args, with_matching, with_scaled);
    }
    if (selftest->parsed()) {
      return csbm::run_selftest(std::cout, selftest_seed) ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
