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

#include "vst/kg_synthesis.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

#include "vst/jsonl.h"

namespace vst::kg {

using nlohmann::json;

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& parts, std::size_t begin,
                 std::size_t end, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += sep;
    out += parts[i];
  }
  return out;
}

// The outermost {...} of a reply that may wrap JSON in prose or fences.
std::optional<json> parse_embedded_json(const std::string& text) {
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    return std::nullopt;
  }
  try {
    return json::parse(text.substr(open, close - open + 1));
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
}

GenerationResult instant_result(std::string text, Millis issued_at) {
  GenerationResult r;
  r.token_count = count_tokens(text);
  r.text = std::move(text);
  r.issued_at = issued_at;
  r.completed_at = issued_at;
  return r;
}

GenerationRequest text_request(Purpose purpose, std::string system,
                               std::string user, json payload) {
  GenerationRequest request;
  request.rendered_prompt = "[System]\n" + system + "\n" + user;
  request.messages = {{Role::kSystem, std::move(system)},
                      {Role::kUser, std::move(user)}};
  request.context.purpose = purpose;
  request.context.payload = std::move(payload);
  return request;
}

using TripleKey =
    std::tuple<std::string, std::string, std::string, Millis, Millis>;

TripleKey key_of(const EntityTriple& t) {
  return {t.head, t.relation, t.tail, t.span.start, t.span.end};
}

void register_entity(std::map<std::string, EntitySighting>& entities,
                     const std::string& name, const TimeSpan& span) {
  auto [it, inserted] =
      entities.try_emplace(name, EntitySighting{span.start, span.end});
  if (!inserted) {
    it->second.first_seen = std::min(it->second.first_seen, span.start);
    it->second.last_seen = std::max(it->second.last_seen, span.end);
  }
}

// Uniform in [0, n) without modulo bias, independent of the standard
// library's distribution implementations.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t threshold = (0 - range) % range;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return static_cast<std::size_t>(x % range);
  }
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(rng, i)]);
  }
}

struct Frame {
  std::size_t node;
  std::vector<std::size_t> order;
  std::size_t pos = 0;
};

std::optional<EvidenceChain> dfs_once(const KnowledgeGraph& graph,
                                      const ChainSamplingOptions& options,
                                      std::mt19937_64& rng) {
  const std::size_t start = bounded(rng, graph.nodes.size());
  std::vector<bool> on_path(graph.nodes.size(), false);
  std::vector<Frame> stack;
  std::vector<std::size_t> path_edges;

  auto push = [&](std::size_t node) {
    Frame f{node, graph.out_edges[node], 0};
    shuffle(f.order, rng);
    on_path[node] = true;
    stack.push_back(std::move(f));
  };
  auto finish = [&] {
    EvidenceChain chain;
    chain.edges = path_edges;
    for (const auto& f : stack) chain.nodes.push_back(f.node);
    return chain;
  };

  push(start);
  std::size_t expansions = 0;
  while (!stack.empty()) {
    if (path_edges.size() == options.max_hops) return finish();
    Frame& top = stack.back();
    std::optional<std::size_t> next;
    while (top.pos < top.order.size()) {
      const std::size_t e = top.order[top.pos++];
      if (!on_path[graph.edges[e].to]) {
        next = e;
        break;
      }
    }
    if (next) {
      if (++expansions > options.visit_budget) return std::nullopt;
      path_edges.push_back(*next);
      push(graph.edges[*next].to);
      continue;
    }
    // Every continuation from here is exhausted.
    if (path_edges.size() >= options.min_hops) return finish();
    on_path[top.node] = false;
    stack.pop_back();
    if (!path_edges.empty()) path_edges.pop_back();
  }
  return std::nullopt;
}

}  // namespace

std::string format_interval(const TimeSpan& span) {
  return format_seconds(span.start) + "-" + format_seconds(span.end) + "s";
}

std::vector<int> EntityBank::window_ids() const {
  std::vector<int> ids;
  for (const auto& c : window) ids.push_back(c.clip_id);
  return ids;
}

EntityBank make_entity_bank(std::size_t window_size) {
  if (window_size < 1) throw ParameterError("window size W must be >= 1");
  EntityBank bank;
  bank.window_size = window_size;
  return bank;
}

std::string normalize_name(std::string_view text) {
  const auto words = split_words(text);
  return join(words, 0, words.size());
}

EntityBank update_entity_bank(EntityBank bank, const SceneClip& clip,
                              std::span<const EntityTriple> extraction,
                              std::size_t window_size) {
  if (window_size < 1) throw ParameterError("window size W must be >= 1");
  if (clip.span.end < clip.span.start) {
    throw DomainError("scene clip " + std::to_string(clip.clip_id) +
                      " ends before it starts");
  }
  if (!bank.window.empty()) {
    const auto& last = bank.window.back();
    if (clip.clip_id <= last.clip_id || clip.span.start < last.span.end) {
      throw DomainError("scene clip " + std::to_string(clip.clip_id) +
                        " does not extend the timeline");
    }
  }

  std::vector<EntityTriple> fresh;
  for (std::size_t i = 0; i < extraction.size(); ++i) {
    EntityTriple t = extraction[i];
    t.head = normalize_name(t.head);
    t.relation = normalize_name(t.relation);
    t.tail = normalize_name(t.tail);
    if (t.head.empty() || t.tail.empty()) {
      throw ExtractionError(i, "triple " + std::to_string(i) + " of clip " +
                                   std::to_string(clip.clip_id) +
                                   " has an empty entity");
    }
    fresh.push_back(std::move(t));
  }

  std::set<TripleKey> seen;
  for (const auto& t : bank.triples) seen.insert(key_of(t));
  for (auto& t : fresh) {
    if (!seen.insert(key_of(t)).second) continue;
    register_entity(bank.entities, t.head, t.span);
    register_entity(bank.entities, t.tail, t.span);
    bank.triples.push_back(std::move(t));
  }

  bank.window_size = window_size;
  bank.window.push_back(clip);
  while (bank.window.size() > window_size) bank.window.pop_front();
  return bank;
}

RefineOutcome apply_refinement(const EntityBank& bank, const json& proposal) {
  if (!proposal.is_object()) throw ParseError("refinement proposal is not an object");
  std::map<std::string, std::string> merge;
  std::set<std::string> remove;
  if (auto it = proposal.find("merge"); it != proposal.end()) {
    if (!it->is_object()) throw ParseError("refinement merge is not an object");
    for (const auto& [from, to] : it->items()) {
      merge[normalize_name(from)] = normalize_name(to.get<std::string>());
    }
  }
  if (auto it = proposal.find("remove"); it != proposal.end()) {
    if (!it->is_array()) throw ParseError("refinement remove is not an array");
    for (const auto& name : *it) remove.insert(normalize_name(name.get<std::string>()));
  }

  RefineOutcome out;
  auto resolve = [&](std::string name) {
    for (std::size_t hops = 0; hops <= merge.size(); ++hops) {
      auto it = merge.find(name);
      if (it == merge.end() || it->second == name) return name;
      name = it->second;
    }
    out.warnings.push_back("merge cycle through '" + name + "'");
    return name;
  };

  for (const auto& [from, to] : merge) {
    if (bank.entities.count(from) && from != to) ++out.merged;
  }
  for (const auto& name : remove) {
    if (bank.entities.count(name)) ++out.removed;
  }

  out.bank.window_size = bank.window_size;
  out.bank.window = bank.window;
  std::set<TripleKey> seen;
  for (const auto& t : bank.triples) {
    EntityTriple r = t;
    r.head = resolve(t.head);
    r.tail = resolve(t.tail);
    if (r.head.empty() || r.tail.empty() || remove.count(r.head) ||
        remove.count(r.tail)) {
      ++out.dropped_triples;
      continue;
    }
    if (!seen.insert(key_of(r)).second) continue;
    register_entity(out.bank.entities, r.head, r.span);
    register_entity(out.bank.entities, r.tail, r.span);
    out.bank.triples.push_back(std::move(r));
  }
  if (out.dropped_triples > 0) {
    out.warnings.push_back("dropped " + std::to_string(out.dropped_triples) +
                           " triples referencing removed entities");
  }
  return out;
}

RefineOutcome refine_bank(const EntityBank& bank, Backend& backend) {
  json names = json::array();
  std::string listing;
  for (const auto& [name, _] : bank.entities) {
    names.push_back(name);
    listing += "- " + name + "\n";
  }
  auto request = text_request(
      Purpose::kBankRefinement,
      "You maintain an entity bank extracted from a video.",
      "Entities:\n" + listing +
          "Identify duplicate names for the same entity and noise entries such "
          "as subtitles or on-screen text. Reply with JSON "
          "{\"merge\": {\"<alias>\": \"<canonical>\"}, \"remove\": "
          "[\"<name>\"]}.",
      json{{"entities", names}});
  try {
    auto result = backend.generate(request, Millis{0});
    auto proposal = parse_embedded_json(result.text);
    if (!proposal) throw ParseError("refinement reply is not JSON");
    return apply_refinement(bank, *proposal);
  } catch (const Error& e) {
    RefineOutcome out;
    out.bank = bank;
    out.warnings.push_back(std::string("bank refinement skipped: ") + e.what());
    return out;
  } catch (const json::exception& e) {
    RefineOutcome out;
    out.bank = bank;
    out.warnings.push_back(std::string("bank refinement skipped: ") + e.what());
    return out;
  }
}

std::optional<std::size_t> KnowledgeGraph::find(std::string_view name) const {
  auto it = std::lower_bound(
      nodes.begin(), nodes.end(), name,
      [](const KgNode& n, std::string_view v) { return n.name < v; });
  if (it == nodes.end() || it->name != name) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

KnowledgeGraph build_graph(const EntityBank& bank) {
  KnowledgeGraph graph;
  for (const auto& [name, seen] : bank.entities) {
    graph.nodes.push_back(KgNode{name, seen.first_seen, seen.last_seen});
  }
  graph.out_edges.resize(graph.nodes.size());
  for (const auto& t : bank.triples) {
    if (t.head == t.tail) continue;
    const auto from = graph.find(t.head);
    const auto to = graph.find(t.tail);
    if (!from || !to) continue;
    graph.out_edges[*from].push_back(graph.edges.size());
    graph.edges.push_back(
        KgEdge{*from, *to, t.relation, t.span, t.description, t.clip_id});
  }
  return graph;
}

std::set<std::string> chain_entities(const KnowledgeGraph& graph,
                                     const EvidenceChain& chain) {
  std::set<std::string> out;
  for (auto n : chain.nodes) out.insert(graph.nodes.at(n).name);
  return out;
}

double chain_overlap(const std::set<std::string>& a,
                     const std::set<std::string>& b) {
  if (a.empty() || b.empty()) throw DomainError("overlap of an empty chain");
  std::size_t shared = 0;
  for (const auto& x : a) shared += b.count(x);
  return static_cast<double>(shared) /
         static_cast<double>(std::min(a.size(), b.size()));
}

double chain_overlap(const KnowledgeGraph& graph, const EvidenceChain& a,
                     const EvidenceChain& b) {
  return chain_overlap(chain_entities(graph, a), chain_entities(graph, b));
}

bool is_simple_path(const KnowledgeGraph& graph, const EvidenceChain& chain) {
  if (chain.edges.empty() || chain.nodes.size() != chain.edges.size() + 1) {
    return false;
  }
  std::set<std::size_t> seen;
  for (auto n : chain.nodes) {
    if (n >= graph.nodes.size() || !seen.insert(n).second) return false;
  }
  for (std::size_t i = 0; i < chain.edges.size(); ++i) {
    if (chain.edges[i] >= graph.edges.size()) return false;
    const auto& e = graph.edges[chain.edges[i]];
    if (e.from != chain.nodes[i] || e.to != chain.nodes[i + 1]) return false;
  }
  return true;
}

ChainSample sample_chains(const KnowledgeGraph& graph,
                          const ChainSamplingOptions& options) {
  if (graph.nodes.empty()) throw ParameterError("graph has no nodes");
  if (options.min_hops < 1 || options.max_hops < options.min_hops) {
    throw ParameterError("need 1 <= min_hops <= max_hops");
  }
  if (!(options.max_overlap > 0.0) || options.max_overlap > 1.0) {
    throw ParameterError("max_overlap must lie in (0, 1]");
  }
  std::mt19937_64 rng(options.seed);
  ChainSample sample;
  std::vector<std::set<std::string>> accepted;
  while (sample.chains.size() < options.count) {
    bool found = false;
    for (std::size_t attempt = 0; attempt < options.restarts_per_chain;
         ++attempt) {
      ++sample.restarts;
      auto chain = dfs_once(graph, options, rng);
      if (!chain) continue;
      auto entities = chain_entities(graph, *chain);
      const bool diverse = std::all_of(
          accepted.begin(), accepted.end(), [&](const auto& other) {
            return chain_overlap(entities, other) < options.max_overlap;
          });
      if (!diverse) continue;
      chain->chain_id = static_cast<int>(sample.chains.size()) + 1;
      accepted.push_back(std::move(entities));
      sample.chains.push_back(std::move(*chain));
      found = true;
      break;
    }
    if (!found) {
      sample.diagnostic =
          "found " + std::to_string(sample.chains.size()) + " of " +
          std::to_string(options.count) + " chains; " +
          std::to_string(options.restarts_per_chain) +
          " restarts produced no further path with " +
          std::to_string(options.min_hops) + "-" +
          std::to_string(options.max_hops) + " hops and overlap below " +
          std::to_string(options.max_overlap);
      break;
    }
  }
  return sample;
}

json to_json(const SynthesizedQA& qa) {
  return json{{"question", qa.question},
              {"cot", qa.cot},
              {"answer", qa.answer},
              {"reasoning_type", qa.reasoning_type},
              {"chain_id", qa.chain_id}};
}

GenerationRequest qa_request(const KnowledgeGraph& graph,
                             const EvidenceChain& chain) {
  json nodes = json::array();
  std::string path;
  for (auto e : chain.edges) {
    const auto& edge = graph.edges.at(e);
    const auto& head = graph.nodes.at(edge.from).name;
    const auto& tail = graph.nodes.at(edge.to).name;
    const auto interval = format_interval(edge.span);
    nodes.push_back({{"head", head},
                     {"relation", edge.relation},
                     {"tail", tail},
                     {"interval", interval},
                     {"description", edge.description}});
    path += "[" + interval + "] " + head + " " + edge.relation + " " + tail;
    if (!edge.description.empty()) path += " (" + edge.description + ")";
    path += "\n";
  }
  return text_request(
      Purpose::kQaSynthesis, "You are a Cognitive Video Intelligence Engine.",
      "Evidence path, listed in path order rather than time order:\n" + path +
          "Write one question that can only be answered by combining every "
          "piece of evidence above, then a streaming chain of thought with one "
          "span per piece of evidence, and the answer.\n"
          "Natural Language Constraint: refer to evidence only by its time "
          "interval or event description. Never write \"Step\", \"Clip "
          "index\" or \"Path node\".\n"
          "Reply with JSON {\"question\": ..., \"cot\": [...], \"answer\": "
          "..., \"reasoning_type\": ...}.",
      json{{"chain_id", chain.chain_id}, {"chain", nodes}});
}

SynthesizedQA parse_qa_response(const std::string& raw,
                                const KnowledgeGraph& graph,
                                const EvidenceChain& chain) {
  auto parsed = parse_embedded_json(raw);
  if (!parsed || !parsed->is_object()) {
    throw SynthesisError("QA reply is not a JSON object", raw);
  }
  SynthesizedQA qa;
  qa.chain_id = chain.chain_id;
  try {
    for (const char* key : {"question", "cot", "answer", "reasoning_type"}) {
      if (!parsed->contains(key)) {
        throw SynthesisError(std::string("QA reply lacks '") + key + "'", raw);
      }
    }
    qa.question = parsed->at("question").get<std::string>();
    qa.answer = parsed->at("answer").get<std::string>();
    qa.reasoning_type = parsed->at("reasoning_type").get<std::string>();
    const auto& cot = parsed->at("cot");
    if (cot.is_array()) {
      for (const auto& span : cot) qa.cot.push_back(span.get<std::string>());
    } else {
      std::istringstream lines(cot.get<std::string>());
      std::string line;
      while (std::getline(lines, line)) {
        if (!normalize_name(line).empty()) qa.cot.push_back(line);
      }
    }
  } catch (const json::exception& e) {
    throw SynthesisError(std::string("QA reply has a mistyped field: ") +
                             e.what(),
                         raw);
  }
  if (qa.cot.empty()) throw SynthesisError("QA reply has an empty cot", raw);

  std::vector<std::string> intervals;
  for (auto e : chain.edges) intervals.push_back(format_interval(graph.edges.at(e).span));
  for (std::size_t i = 0; i < qa.cot.size(); ++i) {
    const bool cites = std::any_of(
        intervals.begin(), intervals.end(),
        [&](const std::string& iv) { return qa.cot[i].find(iv) != std::string::npos; });
    if (!cites) {
      throw SynthesisError("cot span " + std::to_string(i) +
                               " cites no interval of the chain",
                           raw);
    }
  }
  return qa;
}

SynthesizedQA synthesize_qa(const EvidenceChain& chain,
                            const KnowledgeGraph& graph, Backend& backend) {
  if (!is_simple_path(graph, chain)) {
    throw ParameterError("chain " + std::to_string(chain.chain_id) +
                         " is not a simple path of the graph");
  }
  auto result = backend.generate(qa_request(graph, chain), Millis{0});
  return parse_qa_response(result.text, graph, chain);
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass:
      return "PASS";
    case Verdict::kFail:
      return "FAIL";
    case Verdict::kIndeterminate:
      return "INDETERMINATE";
  }
  return "INDETERMINATE";
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::kAccept:
      return "accept";
    case Decision::kReject:
      return "reject";
    case Decision::kQuarantine:
      return "quarantine";
  }
  return "quarantine";
}

namespace {

bool contains_token(std::string_view text, std::string_view token) {
  std::size_t pos = 0;
  while ((pos = text.find(token, pos)) != std::string_view::npos) {
    const bool left = pos == 0 || !is_alnum(text[pos - 1]);
    const auto end = pos + token.size();
    const bool right = end == text.size() || !is_alnum(text[end]);
    if (left && right) return true;
    ++pos;
  }
  return false;
}

std::vector<std::string> sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    current += text[i];
    const bool stop = text[i] == '.' || text[i] == '!' || text[i] == '?';
    const bool boundary = i + 1 == text.size() ||
                          std::isspace(static_cast<unsigned char>(text[i + 1]));
    if (stop && boundary) {
      if (auto s = normalize_name(current); !s.empty()) out.push_back(s);
      current.clear();
    }
  }
  if (auto s = normalize_name(current); !s.empty()) out.push_back(s);
  return out;
}

CheckResult delegated_check(std::string_view name, const SynthesizedQA& qa,
                            Backend& backend) {
  CheckResult result{std::string(name), Verdict::kIndeterminate, ""};
  auto request = text_request(
      Purpose::kRubricCheck, "You audit synthesized video QA items.",
      "Check: " + std::string(name) + "\nItem:\n" + to_json(qa).dump() +
          "\nReply with JSON {\"verdict\": \"pass\" or \"fail\", "
          "\"reason\": ...}.",
      json{{"check", name}, {"qa", to_json(qa)}});
  try {
    auto reply = backend.generate(request, Millis{0});
    auto parsed = parse_embedded_json(reply.text);
    if (!parsed || !parsed->contains("verdict")) {
      result.reason = "unparseable rubric reply";
      return result;
    }
    const auto verdict = lower(parsed->at("verdict").get<std::string>());
    result.reason = parsed->value("reason", "");
    if (verdict == "pass") {
      result.verdict = Verdict::kPass;
    } else if (verdict == "fail") {
      result.verdict = Verdict::kFail;
    } else {
      result.reason = "unknown verdict '" + verdict + "'";
    }
  } catch (const BackendError& e) {
    result.reason = e.what();
  } catch (const json::exception& e) {
    result.reason = e.what();
  }
  return result;
}

}  // namespace

CheckResult check_format_alignment(const SynthesizedQA& qa) {
  CheckResult result{"format_alignment", Verdict::kPass, ""};
  auto fail = [&](std::string reason) {
    result.verdict = Verdict::kFail;
    result.reason = std::move(reason);
    return result;
  };
  if (normalize_name(qa.question).empty()) return fail("missing question");
  if (normalize_name(qa.answer).empty()) return fail("missing answer");
  if (normalize_name(qa.reasoning_type).empty()) {
    return fail("missing reasoning_type");
  }
  if (qa.cot.empty()) return fail("missing cot");
  std::vector<std::string_view> fields{qa.question, qa.answer};
  for (const auto& span : qa.cot) {
    if (normalize_name(span).empty()) return fail("empty cot span");
    fields.push_back(span);
  }
  for (auto token : kBannedTokens) {
    for (auto field : fields) {
      if (contains_token(field, token)) {
        return fail("banned token '" + std::string(token) + "'");
      }
    }
  }
  return result;
}

CheckResult check_repetition(const SynthesizedQA& qa) {
  CheckResult result{"repetition", Verdict::kPass, ""};
  std::set<std::string> seen;
  std::vector<std::string> all = sentences(qa.question);
  for (const auto& span : qa.cot) {
    auto s = sentences(span);
    all.insert(all.end(), s.begin(), s.end());
  }
  for (const auto& s : all) {
    if (!seen.insert(s).second) {
      result.verdict = Verdict::kFail;
      result.reason = "repeated sentence: " + s;
      return result;
    }
  }
  return result;
}

FilterResult filter_qa(const SynthesizedQA& qa, Backend& rubric_backend) {
  FilterResult out;
  for (auto name : kCheckNames) {
    if (name == "format_alignment") {
      out.checks.push_back(check_format_alignment(qa));
    } else if (name == "repetition") {
      out.checks.push_back(check_repetition(qa));
    } else {
      out.checks.push_back(delegated_check(name, qa, rubric_backend));
    }
  }
  const auto has = [&](Verdict v) {
    return std::any_of(out.checks.begin(), out.checks.end(),
                       [&](const CheckResult& c) { return c.verdict == v; });
  };
  out.decision = has(Verdict::kFail)            ? Decision::kReject
                 : has(Verdict::kIndeterminate) ? Decision::kQuarantine
                                                : Decision::kAccept;
  return out;
}

json to_json(const FilterResult& result) {
  json checks = json::array();
  for (const auto& c : result.checks) {
    checks.push_back(
        {{"check", c.name}, {"verdict", to_string(c.verdict)}, {"reason", c.reason}});
  }
  return json{{"decision", to_string(result.decision)}, {"checks", checks}};
}

GenerationRequest extraction_request(const EntityBank& bank,
                                     const SceneClip& clip) {
  std::string context;
  const std::size_t keep = bank.window_size - 1;
  const std::size_t skip = bank.window.size() > keep ? bank.window.size() - keep : 0;
  for (std::size_t i = skip; i < bank.window.size(); ++i) {
    const auto& c = bank.window[i];
    context += "[" + format_interval(c.span) + "] " + c.description + "\n";
  }
  std::string known;
  for (const auto& [name, _] : bank.entities) {
    if (!known.empty()) known += ", ";
    known += name;
  }
  return text_request(
      Purpose::kEntityExtraction, "You are a Visual Scene Analyst.",
      "Earlier scenes:\n" + (context.empty() ? std::string("(none)\n") : context) +
          "Known entities: " + (known.empty() ? std::string("(none)") : known) +
          "\nCurrent scene [" + format_interval(clip.span) + "]: " +
          clip.description +
          "\nList every event in the current scene as a relation between two "
          "entities, reusing known entity names for the same entity. Reply "
          "with JSON {\"events\": [{\"subject\": ..., \"relation\": ..., "
          "\"object\": ..., \"description\": ...}]}.",
      json{{"clip_id", clip.clip_id}, {"description", clip.description}});
}

std::vector<EntityTriple> triples_from_events(const json& events,
                                              const SceneClip& clip) {
  if (!events.is_array()) throw ParseError("events must be an array");
  std::vector<EntityTriple> out;
  for (const auto& e : events) {
    EntityTriple t;
    t.head = e.at("subject").get<std::string>();
    t.relation = e.at("relation").get<std::string>();
    t.tail = e.at("object").get<std::string>();
    t.description = e.value("description", clip.description);
    t.span = clip.span;
    t.clip_id = clip.clip_id;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<EntityTriple> extract_triples(const EntityBank& bank,
                                          const SceneClip& clip,
                                          Backend& backend) {
  auto reply = backend.generate(extraction_request(bank, clip), Millis{0});
  auto parsed = parse_embedded_json(reply.text);
  if (!parsed || !parsed->contains("events")) {
    throw BackendError("extraction reply for clip " +
                       std::to_string(clip.clip_id) + " is not JSON with events");
  }
  try {
    return triples_from_events(parsed->at("events"), clip);
  } catch (const json::exception& e) {
    throw BackendError("extraction reply for clip " +
                       std::to_string(clip.clip_id) + ": " + e.what());
  }
}

std::vector<SceneClip> load_scenes(const std::filesystem::path& path) {
  std::vector<SceneClip> scenes;
  const auto lines = read_jsonl_file(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      SceneClip c;
      c.clip_id = lines[i].at("clip_id").get<int>();
      c.span.start = from_seconds(lines[i].at("start_s").get<double>());
      c.span.end = from_seconds(lines[i].at("end_s").get<double>());
      c.description = lines[i].value("description", "");
      scenes.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": record " + std::to_string(i + 1) +
                       ": " + e.what());
    }
  }
  return scenes;
}

std::map<int, json> load_extraction_trace(const std::filesystem::path& path) {
  std::map<int, json> out;
  const auto lines = read_jsonl_file(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out[lines[i].at("clip_id").get<int>()] = lines[i].at("events");
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": record " + std::to_string(i + 1) +
                       ": " + e.what());
    }
  }
  return out;
}

namespace {

bool is_article(const std::string& w) {
  const auto l = lower(w);
  return l == "the" || l == "a" || l == "an";
}

json mock_extract(const json& payload) {
  json events = json::array();
  std::istringstream parts(payload.value("description", ""));
  std::string part;
  while (std::getline(parts, part, ';')) {
    auto w = split_words(part);
    if (!w.empty() && !w.back().empty() && w.back().back() == '.') {
      w.back().pop_back();
    }
    const std::size_t head_len = w.size() > 1 && is_article(w[0]) ? 2 : 1;
    const std::size_t tail_len =
        w.size() > 1 && is_article(w[w.size() - 2]) ? 2 : 1;
    if (w.size() < head_len + tail_len + 1) continue;
    events.push_back({{"subject", join(w, 0, head_len)},
                      {"relation", join(w, head_len, w.size() - tail_len)},
                      {"object", join(w, w.size() - tail_len, w.size())},
                      {"description", normalize_name(part)}});
  }
  return json{{"events", events}};
}

json mock_refine(const json& payload) {
  json merge = json::object();
  json remove = json::array();
  for (const auto& n : payload.value("entities", json::array())) {
    const auto name = n.get<std::string>();
    const auto l = lower(name);
    if (l.rfind("subtitle", 0) == 0) {
      remove.push_back(name);
    } else if (l.rfind("the ", 0) == 0 && name.size() > 4) {
      merge[name] = name.substr(4);
    }
  }
  return json{{"merge", merge}, {"remove", remove}};
}

json mock_qa(const json& payload) {
  const auto& chain = payload.at("chain");
  json cot = json::array();
  for (const auto& node : chain) {
    cot.push_back("During " + node.at("interval").get<std::string>() + ", " +
                  node.at("head").get<std::string>() + " " +
                  node.at("relation").get<std::string>() + " " +
                  node.at("tail").get<std::string>() + ".");
  }
  const auto first = chain.front().at("head").get<std::string>();
  const auto last = chain.back().at("tail").get<std::string>();
  return json{{"question", "How does " + first + " lead to " + last + "?"},
              {"cot", cot},
              {"answer", last},
              {"reasoning_type", "multi_hop"}};
}

}  // namespace

GenerationResult MockKgBackend::generate(const GenerationRequest& request,
                                         Millis issued_at) {
  const auto& payload = request.context.payload;
  switch (request.context.purpose) {
    case Purpose::kEntityExtraction:
      return instant_result(mock_extract(payload).dump(), issued_at);
    case Purpose::kBankRefinement:
      return instant_result(mock_refine(payload).dump(), issued_at);
    case Purpose::kQaSynthesis:
      return instant_result(mock_qa(payload).dump(), issued_at);
    case Purpose::kRubricCheck: {
      const auto check = payload.value("check", "");
      const bool fail = failing_checks_.count(check) > 0;
      return instant_result(
          json{{"verdict", fail ? "fail" : "pass"},
               {"reason", fail ? "planted failure" : "ok"}}
              .dump(),
          issued_at);
    }
    case Purpose::kThought:
    case Purpose::kAnswer:
      break;
  }
  throw BackendError("mock_kg backend serves only data-synthesis prompts");
}

PipelineResult run_pipeline(std::span<const SceneClip> scenes,
                            const std::map<int, json>& extractions,
                            Backend& backend, const PipelineOptions& options) {
  PipelineResult out;
  out.bank = make_entity_bank(options.window_size);
  for (const auto& scene : scenes) {
    std::vector<EntityTriple> triples;
    if (auto it = extractions.find(scene.clip_id); it != extractions.end()) {
      try {
        triples = triples_from_events(it->second, scene);
      } catch (const json::exception& e) {
        throw ParseError("extraction for clip " + std::to_string(scene.clip_id) +
                         ": " + e.what());
      }
    } else {
      try {
        triples = extract_triples(out.bank, scene, backend);
      } catch (const BackendError& e) {
        out.warnings.push_back(e.what());
      }
    }
    out.bank = update_entity_bank(std::move(out.bank), scene, triples,
                                  options.window_size);
  }
  if (options.refine) {
    auto refined = refine_bank(out.bank, backend);
    out.bank = std::move(refined.bank);
    out.warnings.insert(out.warnings.end(), refined.warnings.begin(),
                        refined.warnings.end());
  }
  out.graph = build_graph(out.bank);
  if (out.graph.nodes.empty()) {
    out.warnings.push_back("knowledge graph is empty; no chains sampled");
    return out;
  }
  out.chains = sample_chains(out.graph, options.chains);
  if (!out.chains.diagnostic.empty()) out.warnings.push_back(out.chains.diagnostic);
  for (const auto& chain : out.chains.chains) {
    SynthesizedQA qa;
    try {
      qa = synthesize_qa(chain, out.graph, backend);
    } catch (const SynthesisError& e) {
      out.warnings.push_back(std::string(e.what()) + "; raw: " + e.raw());
      continue;
    } catch (const BackendError& e) {
      out.warnings.push_back(e.what());
      continue;
    }
    auto verdict = filter_qa(qa, backend);
    switch (verdict.decision) {
      case Decision::kAccept:
        out.accepted.push_back(std::move(qa));
        out.accepted_checks.push_back(std::move(verdict));
        break;
      case Decision::kReject:
        out.rejected.emplace_back(std::move(qa), std::move(verdict));
        break;
      case Decision::kQuarantine:
        out.quarantined.emplace_back(std::move(qa), std::move(verdict));
        break;
    }
  }
  return out;
}

json graph_to_json(const KnowledgeGraph& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"name", n.name},
                     {"first_seen_s", to_seconds(n.first_seen)},
                     {"last_seen_s", to_seconds(n.last_seen)}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"head", graph.nodes[e.from].name},
                     {"relation", e.relation},
                     {"tail", graph.nodes[e.to].name},
                     {"start_s", to_seconds(e.span.start)},
                     {"end_s", to_seconds(e.span.end)},
                     {"description", e.description},
                     {"clip_id", e.clip_id}});
  }
  return json{{"nodes", nodes}, {"edges", edges}};
}

json chain_to_json(const KnowledgeGraph& graph, const EvidenceChain& chain) {
  json nodes = json::array();
  for (auto n : chain.nodes) nodes.push_back(graph.nodes.at(n).name);
  json edges = json::array();
  for (auto id : chain.edges) {
    const auto& e = graph.edges.at(id);
    edges.push_back({{"head", graph.nodes[e.from].name},
                     {"relation", e.relation},
                     {"tail", graph.nodes[e.to].name},
                     {"start_s", to_seconds(e.span.start)},
                     {"end_s", to_seconds(e.span.end)},
                     {"description", e.description}});
  }
  return json{{"chain_id", chain.chain_id}, {"nodes", nodes}, {"edges", edges}};
}

void write_pipeline_outputs(const std::filesystem::path& dir,
                            const PipelineResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw RuntimeFailure("cannot write " + (dir / name).string());
    return out;
  };
  open("graph.json") << graph_to_json(result.graph).dump(2) << '\n';
  {
    auto out = open("chains.jsonl");
    for (const auto& c : result.chains.chains) {
      out << chain_to_json(result.graph, c).dump() << '\n';
    }
  }
  {
    auto out = open("qa.jsonl");
    for (const auto& qa : result.accepted) out << to_json(qa).dump() << '\n';
  }
  auto out = open("rubric.jsonl");
  auto emit = [&](const SynthesizedQA& qa, const json& verdict) {
    json line = verdict;
    line["chain_id"] = qa.chain_id;
    out << line.dump() << '\n';
  };
  for (std::size_t i = 0; i < result.accepted.size(); ++i) {
    emit(result.accepted[i], to_json(result.accepted_checks.at(i)));
  }
  for (const auto& [qa, verdict] : result.rejected) emit(qa, to_json(verdict));
  for (const auto& [qa, verdict] : result.quarantined) emit(qa, to_json(verdict));
}

}  // namespace vst::kg
