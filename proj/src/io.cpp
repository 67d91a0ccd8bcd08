#include "csbm/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace csbm {

namespace {

char label_digit(std::uint32_t c) {
  if (c < 10) return static_cast<char>('0' + c);
  if (c < 36) return static_cast<char>('a' + (c - 10));
  throw std::invalid_argument("edge list format supports at most k = 36 communities");
}

std::uint32_t digit_label(char d) {
  if (d >= '0' && d <= '9') return static_cast<std::uint32_t>(d - '0');
  if (d >= 'a' && d <= 'z') return static_cast<std::uint32_t>(d - 'a' + 10);
  throw std::invalid_argument(std::string("bad community digit: ") + d);
}

Json edges_json(const Graph& g) {
  Json out = Json::array();
  g.for_each_edge([&](Vertex u, Vertex v) { out.push_back(Json::array({u, v})); });
  return out;
}

Graph graph_from_edges(Vertex n, const Json& edges) {
  Graph g(n);
  for (const auto& e : edges) {
    g.set_edge(e.at(0).get<Vertex>(), e.at(1).get<Vertex>(), true);
  }
  return g;
}

}  // namespace

std::string label_mode_name(LabelMode mode) {
  return mode == LabelMode::UniformRandom ? "uniform" : "balanced";
}

LabelMode label_mode_from_string(const std::string& name) {
  if (name == "uniform") return LabelMode::UniformRandom;
  if (name == "balanced") return LabelMode::FixedBalanced;
  throw std::invalid_argument("unknown label mode: " + name);
}

std::string matcher_kind_name(MatcherKind kind) {
  switch (kind) {
    case MatcherKind::Exhaustive: return "exhaustive";
    case MatcherKind::BranchAndBound: return "bnb";
    case MatcherKind::LocalSearch: return "local";
    case MatcherKind::Oracle: return "oracle";
  }
  return "?";
}

MatcherKind matcher_kind_from_string(const std::string& name) {
  if (name == "exhaustive") return MatcherKind::Exhaustive;
  if (name == "bnb") return MatcherKind::BranchAndBound;
  if (name == "local") return MatcherKind::LocalSearch;
  if (name == "oracle") return MatcherKind::Oracle;
  throw std::invalid_argument("unknown solver: " + name);
}

std::string recovery_kind_name(RecoveryKind kind) {
  return kind == RecoveryKind::ExactMl ? "exact-ml" : "spectral";
}

RecoveryKind recovery_kind_from_string(const std::string& name) {
  if (name == "exact-ml") return RecoveryKind::ExactMl;
  if (name == "spectral") return RecoveryKind::Spectral;
  throw std::invalid_argument("unknown recovery method: " + name);
}

std::string to_edge_list(const Graph& g, const CommunityLabels& sigma) {
  if (sigma.n() != g.vertex_count()) throw std::invalid_argument("to_edge_list: size mismatch");
  std::ostringstream out;
  out << g.vertex_count() << ' ' << sigma.k << '\n';
  for (auto c : sigma.sigma) out << label_digit(c);
  out << '\n';
  g.for_each_edge([&](Vertex u, Vertex v) { out << u << ' ' << v << '\n'; });
  return out.str();
}

std::pair<Graph, CommunityLabels> from_edge_list(const std::string& text) {
  std::istringstream in(text);
  Vertex n = 0;
  std::uint32_t k = 0;
  if (!(in >> n >> k)) throw std::invalid_argument("edge list: bad header line");
  std::string digits;
  if (!(in >> digits) || digits.size() != n) {
    throw std::invalid_argument("edge list: sigma line must have n digits");
  }
  CommunityLabels sigma;
  sigma.k = k;
  sigma.sigma.reserve(n);
  for (char d : digits) {
    const std::uint32_t c = digit_label(d);
    if (c >= k) throw std::invalid_argument("edge list: label exceeds k");
    sigma.sigma.push_back(c);
  }
  Graph g(n);
  Vertex u, v;
  while (in >> u >> v) {
    if (u >= v) throw std::invalid_argument("edge list: edges must satisfy u < v");
    g.set_edge(u, v, true);
  }
  return {std::move(g), std::move(sigma)};
}

Json instance_to_json(const CorrelatedInstance& instance) {
  Json j;
  j["format"] = "csbm-instance";
  j["params"] = {{"n", instance.params.n},
                 {"k", instance.params.k},
                 {"p", instance.params.p},
                 {"q", instance.params.q},
                 {"label_mode", label_mode_name(instance.params.label_mode)}};
  j["s"] = instance.s;
  j["r"] = instance.r();
  j["seed"] = instance.seed;
  j["conditioned_on_balanced"] = instance.conditioned_on_balanced;
  j["balance_eps"] = instance.balance_eps;
  j["sigma"] = instance.sigma.sigma;
  Json perms = Json::array();
  for (const Perm& pi : instance.perms) perms.push_back(pi);
  j["perms"] = std::move(perms);
  j["parent_edges"] = edges_json(instance.parent);
  Json copies = Json::array();
  for (const Graph& g : instance.copies) copies.push_back(edges_json(g));
  j["copy_edges"] = std::move(copies);
  return j;
}

CorrelatedInstance instance_from_json(const Json& j) {
  if (j.value("format", "") != "csbm-instance") {
    throw std::invalid_argument("instance JSON: missing csbm-instance format tag");
  }
  CorrelatedInstance instance;
  const Json& params = j.at("params");
  instance.params.n = params.at("n").get<std::uint32_t>();
  instance.params.k = params.at("k").get<std::uint32_t>();
  instance.params.p = params.at("p").get<double>();
  instance.params.q = params.at("q").get<double>();
  instance.params.label_mode = label_mode_from_string(params.at("label_mode").get<std::string>());
  instance.s = j.at("s").get<double>();
  instance.seed = j.at("seed").get<std::uint64_t>();
  instance.conditioned_on_balanced = j.value("conditioned_on_balanced", false);
  instance.balance_eps = j.value("balance_eps", 0.0);
  instance.sigma.k = instance.params.k;
  instance.sigma.sigma = j.at("sigma").get<std::vector<std::uint32_t>>();
  for (const auto& p : j.at("perms")) {
    Perm pi = p.get<Perm>();
    check_perm(pi, instance.params.n);
    instance.perms.push_back(std::move(pi));
  }
  instance.parent = graph_from_edges(instance.params.n, j.at("parent_edges"));
  for (const auto& edges : j.at("copy_edges")) {
    instance.copies.push_back(graph_from_edges(instance.params.n, edges));
  }
  if (instance.copies.size() != instance.perms.size() + 1) {
    throw std::invalid_argument("instance JSON: copies and perms are inconsistent");
  }
  return instance;
}

Json match_stats_to_json(const MatchStats& stats) {
  Json j;
  j["overlap"] = stats.overlap;
  j["x"] = stats.x;
  j["y_plus"] = stats.y_plus;
  j["y_minus"] = stats.y_minus;
  j["m_plus"] = stats.m_plus;
  j["m_minus"] = stats.m_minus;
  j["e_tr_plus"] = stats.e_tr_plus;
  j["e_tr_minus"] = stats.e_tr_minus;
  j["profile"] = stats.profile.x;
  Json hist = Json::object();
  for (const auto& [len, count] : cycle_histogram(stats.cycles)) {
    hist[std::to_string(len)] = count;
  }
  j["cycle_histogram"] = std::move(hist);
  return j;
}

Json match_result_to_json(const MatchResult& result) {
  Json j;
  j["pi_hat"] = result.pi_hat;
  j["score"] = result.score;
  j["maximizer_count"] = result.maximizer_count;
  j["exact"] = result.exact;
  j["nodes"] = result.nodes;
  j["elapsed_ms"] = result.elapsed_ms;
  if (!result.maximizers.empty()) {
    Json maxima = Json::array();
    for (const Perm& pi : result.maximizers) maxima.push_back(pi);
    j["maximizers"] = std::move(maxima);
  }
  if (result.stats) j["stats"] = match_stats_to_json(*result.stats);
  return j;
}

Json isolation_report_to_json(const IsolationReport& report) {
  Json j;
  j["size"] = report.t.size();
  j["vertices"] = report.t;
  j["per_community"] = report.per_community;
  j["log_posterior_bound"] = report.log_posterior_bound;
  return j;
}

Json recovery_result_to_json(const RecoveryResult& result, double effective_p,
                             double effective_q) {
  Json j;
  j["method"] = result.method;
  j["sigma_hat"] = result.sigma_hat.sigma;
  j["agreement"] = result.agreement;
  j["exact_success"] = result.exact_success;
  j["converged"] = result.converged;
  j["effective_p"] = effective_p;
  j["effective_q"] = effective_q;
  return j;
}

Json threshold_verdict_to_json(const ThresholdVerdict& verdict) {
  Json j;
  j["regime"] = verdict.regime_tag;
  j["quantity"] = verdict.quantity;
  j["threshold"] = verdict.threshold;
  j["margin"] = verdict.margin;
  j["relation"] = verdict.relation == Relation::Greater ? ">"
                  : verdict.relation == Relation::Less  ? "<"
                                                        : "<=";
  j["satisfied"] = verdict.satisfied;
  j["uses_free_constants"] = verdict.uses_free_constants;
  return j;
}

Json pipeline_result_to_json(const PipelineResult& result) {
  Json j;
  Json matches = Json::array();
  for (const MatchResult& m : result.matches) matches.push_back(match_result_to_json(m));
  j["matches"] = std::move(matches);
  j["matched_exactly"] = result.matched_exactly;
  j["recovery"] = recovery_result_to_json(result.recovery, result.union_graph.effective_p,
                                          result.union_graph.effective_q);
  return j;
}

Json trial_record_to_json(const TrialRecord& record) {
  const TrialSpec& spec = record.spec;
  Json j;
  j["seed"] = record.seed;
  Json sp;
  sp["use_scaled"] = spec.use_scaled;
  if (spec.use_scaled) {
    sp["alpha"] = spec.scaled.alpha;
    sp["beta"] = spec.scaled.beta;
    sp["n"] = spec.scaled.n;
    sp["k"] = spec.scaled.k;
  } else {
    sp["n"] = spec.params.n;
    sp["k"] = spec.params.k;
    sp["p"] = spec.params.p;
    sp["q"] = spec.params.q;
  }
  sp["label_mode"] = label_mode_name(spec.label_mode);
  sp["s"] = spec.s;
  sp["r"] = spec.r;
  sp["matcher"] = matcher_kind_name(spec.matcher);
  sp["budget"] = spec.budget;
  sp["run_recovery"] = spec.run_recovery;
  if (spec.run_recovery) sp["recovery"] = recovery_kind_name(spec.recovery);
  sp["condition_on_balanced"] = spec.condition_on_balanced;
  if (spec.condition_on_balanced) sp["balance_eps"] = spec.balance_eps;
  j["spec"] = std::move(sp);
  j["match_strict"] = record.match_strict;
  j["match_lex"] = record.match_lex;
  j["match_all_exact"] = record.match_all_exact;
  j["x"] = record.x;
  j["y_plus"] = record.y_plus;
  j["y_minus"] = record.y_minus;
  j["m_plus"] = record.m_plus;
  j["m_minus"] = record.m_minus;
  j["t_star_size"] = record.t_star_size;
  j["t_star_per_community"] = record.t_star_per_community;
  j["recovery_agreement"] = record.recovery_agreement;
  j["recovery_exact"] = record.recovery_exact;
  j["conditioned_on_balanced"] = record.conditioned_on_balanced;
  j["wall_ms"] = record.wall_ms;
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace csbm
