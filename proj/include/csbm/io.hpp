#pragma once

#include <string>
#include <utility>

#include "json.hpp"

#include "csbm/harness.hpp"
#include "csbm/lifted.hpp"
#include "csbm/matcher.hpp"
#include "csbm/model.hpp"
#include "csbm/recovery.hpp"
#include "csbm/theory.hpp"

namespace csbm {

// ordered_json keeps insertion order, so serialized output is byte-stable.
using Json = nlohmann::ordered_json;

std::string label_mode_name(LabelMode mode);
LabelMode label_mode_from_string(const std::string& name);
std::string matcher_kind_name(MatcherKind kind);
MatcherKind matcher_kind_from_string(const std::string& name);
std::string recovery_kind_name(RecoveryKind kind);
RecoveryKind recovery_kind_from_string(const std::string& name);

// Plain text graph format: first line "n k", second line sigma as base-k
// digits (0-9 then a-z, so k <= 36), then one "u v" line per edge with u < v.
std::string to_edge_list(const Graph& g, const CommunityLabels& sigma);
std::pair<Graph, CommunityLabels> from_edge_list(const std::string& text);

Json instance_to_json(const CorrelatedInstance& instance);
CorrelatedInstance instance_from_json(const Json& j);

Json match_stats_to_json(const MatchStats& stats);
Json match_result_to_json(const MatchResult& result);
Json isolation_report_to_json(const IsolationReport& report);
Json recovery_result_to_json(const RecoveryResult& result, double effective_p,
                             double effective_q);
Json threshold_verdict_to_json(const ThresholdVerdict& verdict);
Json pipeline_result_to_json(const PipelineResult& result);
Json trial_record_to_json(const TrialRecord& record);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace csbm
