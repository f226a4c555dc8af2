/* Copyright 2026 The VST Runtime Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vst/backends.h"
#include "vst/errors.h"
#include "vst/time.h"

namespace vst::kg {

// A triple with an empty entity; index() is its position in the extraction.
class ExtractionError : public ValidationError {
 public:
  ExtractionError(std::size_t index, const std::string& what)
      : ValidationError(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// A backend response that could not be turned into a QA item.
class SynthesisError : public RuntimeFailure {
 public:
  SynthesisError(const std::string& what, std::string raw)
      : RuntimeFailure(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct TimeSpan {
  Millis start{0};
  Millis end{0};
  bool operator==(const TimeSpan&) const = default;
  auto operator<=>(const TimeSpan&) const = default;
};

// `12.0-18.5s`
std::string format_interval(const TimeSpan& span);

struct SceneClip {
  int clip_id = 1;
  TimeSpan span;
  std::string description;
};

struct EntityTriple {
  std::string head;
  std::string relation;
  std::string tail;
  TimeSpan span;
  std::string description;
  int clip_id = 0;
};

struct EntitySighting {
  Millis first_seen{0};
  Millis last_seen{0};
};

// Entities and triples accumulate for the whole video; the window holds only
// the most recent W clips and feeds extraction context.
struct EntityBank {
  std::size_t window_size = 3;
  std::map<std::string, EntitySighting> entities;
  std::vector<EntityTriple> triples;
  std::deque<SceneClip> window;

  std::vector<int> window_ids() const;
};

EntityBank make_entity_bank(std::size_t window_size);

// Trims and collapses internal whitespace runs to one space.
std::string normalize_name(std::string_view text);

// Registers the clip's triples (deduplicated on normalized head, relation,
// tail and span) and slides the window. The clip must start no earlier than
// the previous one ended and carry a larger id.
EntityBank update_entity_bank(EntityBank bank, const SceneClip& clip,
                              std::span<const EntityTriple> extraction,
                              std::size_t window_size);

struct RefineOutcome {
  EntityBank bank;
  std::size_t merged = 0;
  std::size_t removed = 0;
  std::size_t dropped_triples = 0;
  std::vector<std::string> warnings;
};

// Applies {"merge": {from: to}, "remove": [name]} to the bank. Merges follow
// chains to a fixed point; triples that lose an entity are dropped.
RefineOutcome apply_refinement(const EntityBank& bank,
                               const nlohmann::json& proposal);
// Asks `backend` for a proposal. On any backend or parse failure the bank is
// returned unchanged with a warning.
RefineOutcome refine_bank(const EntityBank& bank, Backend& backend);

struct KgNode {
  std::string name;
  Millis first_seen{0};
  Millis last_seen{0};
};

struct KgEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::string relation;
  TimeSpan span;
  std::string description;
  int clip_id = 0;
};

// Directed multigraph; nodes sorted by name. Self-loops are never stored.
struct KnowledgeGraph {
  std::vector<KgNode> nodes;
  std::vector<KgEdge> edges;
  std::vector<std::vector<std::size_t>> out_edges;  // edge ids per node

  std::optional<std::size_t> find(std::string_view name) const;
};

KnowledgeGraph build_graph(const EntityBank& bank);

struct EvidenceChain {
  int chain_id = 0;
  std::vector<std::size_t> edges;  // consecutive: edges[i].to == edges[i+1].from
  std::vector<std::size_t> nodes;  // edges.size() + 1 entries

  std::size_t hops() const { return edges.size(); }
};

std::set<std::string> chain_entities(const KnowledgeGraph& graph,
                                     const EvidenceChain& chain);
// |A ∩ B| / min(|A|, |B|). DomainError when either set is empty.
double chain_overlap(const std::set<std::string>& a,
                     const std::set<std::string>& b);
double chain_overlap(const KnowledgeGraph& graph, const EvidenceChain& a,
                     const EvidenceChain& b);
// Edges connect in order and no node repeats.
bool is_simple_path(const KnowledgeGraph& graph, const EvidenceChain& chain);

struct ChainSamplingOptions {
  std::size_t count = 20;
  std::size_t min_hops = 3;
  std::size_t max_hops = 8;
  double max_overlap = 0.10;  // accepted pairs satisfy overlap < max_overlap
  std::uint64_t seed = 0;
  std::size_t restarts_per_chain = 200;
  std::size_t visit_budget = 4096;  // DFS expansions per restart
};

struct ChainSample {
  std::vector<EvidenceChain> chains;
  std::size_t restarts = 0;
  // Empty when all requested chains were found.
  std::string diagnostic;
};

// Randomized DFS from random start nodes. A path is taken once it reaches
// max_hops, or at a dead end once it has min_hops. Reproducible per seed.
ChainSample sample_chains(const KnowledgeGraph& graph,
                          const ChainSamplingOptions& options);

struct SynthesizedQA {
  std::string question;
  std::vector<std::string> cot;
  std::string answer;
  std::string reasoning_type;
  int chain_id = 0;
};

nlohmann::json to_json(const SynthesizedQA& qa);

GenerationRequest qa_request(const KnowledgeGraph& graph,
                             const EvidenceChain& chain);
// Parses the backend text; throws SynthesisError, keeping the raw text, when
// the JSON is malformed, a key is missing, or a span cites no chain interval.
SynthesizedQA parse_qa_response(const std::string& raw,
                                const KnowledgeGraph& graph,
                                const EvidenceChain& chain);
SynthesizedQA synthesize_qa(const EvidenceChain& chain,
                            const KnowledgeGraph& graph, Backend& backend);

enum class Verdict { kPass, kFail, kIndeterminate };
std::string_view to_string(Verdict verdict);

enum class Decision { kAccept, kReject, kQuarantine };
std::string_view to_string(Decision decision);

struct CheckResult {
  std::string name;
  Verdict verdict = Verdict::kPass;
  std::string reason;
};

struct FilterResult {
  std::vector<CheckResult> checks;  // always the five checks, in order
  Decision decision = Decision::kAccept;
};

inline constexpr std::string_view kCheckNames[] = {
    "world_knowledge", "format_alignment", "logical_consistency",
    "repetition", "thought_validation"};
inline constexpr std::string_view kBannedTokens[] = {"Step", "Clip index",
                                                     "Path node"};

// The two local checks.
CheckResult check_format_alignment(const SynthesizedQA& qa);
CheckResult check_repetition(const SynthesizedQA& qa);

// Reject on any FAIL, quarantine on any INDETERMINATE, otherwise accept.
FilterResult filter_qa(const SynthesizedQA& qa, Backend& rubric_backend);

nlohmann::json to_json(const FilterResult& result);

// Extraction prompt over the clip plus the bank's window and known entities.
GenerationRequest extraction_request(const EntityBank& bank,
                                     const SceneClip& clip);
// {"events": [{subject, relation, object, description}]} -> triples on the
// clip's span.
std::vector<EntityTriple> triples_from_events(const nlohmann::json& events,
                                              const SceneClip& clip);
std::vector<EntityTriple> extract_triples(const EntityBank& bank,
                                          const SceneClip& clip,
                                          Backend& backend);

// Line-delimited `{clip_id, start_s, end_s, description}`.
std::vector<SceneClip> load_scenes(const std::filesystem::path& path);
// Line-delimited `{clip_id, events: [...]}`, keyed by clip id.
std::map<int, nlohmann::json> load_extraction_trace(
    const std::filesystem::path& path);

// Deterministic stand-in for every pipeline prompt.
//  - extraction splits the description on ';' into "subject relation object"
//  - refinement merges names with a leading "the " and removes names starting
//    with "subtitle"
//  - synthesis builds a question over the chain ends with one span per edge
//  - rubric checks pass unless listed in `failing_checks`
class MockKgBackend : public Backend {
 public:
  explicit MockKgBackend(std::set<std::string> failing_checks = {})
      : failing_checks_(std::move(failing_checks)) {}
  GenerationResult generate(const GenerationRequest& request,
                            Millis issued_at) override;
  std::string_view name() const override { return "mock_kg"; }

 private:
  std::set<std::string> failing_checks_;
};

struct PipelineOptions {
  std::size_t window_size = 3;
  bool refine = true;
  ChainSamplingOptions chains;
};

struct PipelineResult {
  EntityBank bank;
  KnowledgeGraph graph;
  ChainSample chains;
  std::vector<SynthesizedQA> accepted;
  std::vector<FilterResult> accepted_checks;  // parallel to `accepted`
  std::vector<std::pair<SynthesizedQA, FilterResult>> rejected;
  std::vector<std::pair<SynthesizedQA, FilterResult>> quarantined;
  std::vector<std::string> warnings;
};

// Scenes in order; `extractions` supplies recorded events per clip id, other
// clips are extracted through `backend`.
PipelineResult run_pipeline(std::span<const SceneClip> scenes,
                            const std::map<int, nlohmann::json>& extractions,
                            Backend& backend, const PipelineOptions& options);

nlohmann::json graph_to_json(const KnowledgeGraph& graph);
nlohmann::json chain_to_json(const KnowledgeGraph& graph,
                             const EvidenceChain& chain);

// Writes graph.json, chains.jsonl, qa.jsonl and rubric.jsonl into `dir`.
void write_pipeline_outputs(const std::filesystem::path& dir,
                            const PipelineResult& result);

}  // namespace vst::kg
