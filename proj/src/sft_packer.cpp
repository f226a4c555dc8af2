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

#include "vst/sft_packer.h"

#include <cctype>
#include <cmath>
#include <utility>

namespace vst {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string clip_marker(const ClipTokens& clip) {
  return "<clip " + std::to_string(clip.clip_index) + ": " +
         std::to_string(clip.visual_tokens) + " visual tokens>";
}

std::string query_text(const QueryEvent& query) {
  return "Time " + format_seconds(query.query_time) + "s " + query.question;
}

std::vector<ThoughtEntry> thoughts_of(std::span<const SftPair> pairs) {
  std::vector<ThoughtEntry> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) out.push_back(pair.thought);
  return out;
}

std::vector<SftElement> flatten(const MemoryState& memory,
                                std::span<const SftPair> pairs,
                                const std::optional<SftTail>& tail) {
  std::vector<SftElement> out;
  out.reserve(1 + 2 * pairs.size() + 3);
  out.emplace_back(InitialMemory{memory});
  for (const auto& pair : pairs) {
    out.emplace_back(pair.clip);
    out.emplace_back(Thought{pair.thought});
  }
  if (tail) {
    out.emplace_back(tail->final_clip);
    out.emplace_back(Query{tail->query});
    out.emplace_back(Answer{tail->answer});
  }
  return out;
}

class Renderer {
 public:
  void literal(std::string_view text) { append(text, SourceKind::kTemplate, {}); }

  void content(std::string_view text, SourceKind kind, std::size_t element) {
    append(text, kind, element);
  }

  RenderedSegment take() { return std::move(out_); }

 private:
  void append(std::string_view text, SourceKind kind,
              std::optional<std::size_t> element) {
    SourceSpan span;
    span.begin = out_.text.size();
    out_.text += text;
    span.end = out_.text.size();
    span.kind = kind;
    span.element = element;
    out_.spans.push_back(span);
  }

  RenderedSegment out_;
};

RenderedSegment render_elements(const std::vector<SftElement>& elements) {
  Renderer r;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    std::visit(
        Overloaded{
            [&](const InitialMemory& m) {
              r.literal("<memory>\n");
              r.content(render(m.memory), SourceKind::kMemory, e);
              r.literal("\n</memory>\n");
            },
            [&](const FinalClip& c) {
              r.content(clip_marker(c), SourceKind::kFinalClip, e);
              r.literal("\n");
            },
            [&](const ClipTokens& c) {
              r.content(clip_marker(c), SourceKind::kClip, e);
              r.literal("\n");
            },
            [&](const Thought& t) {
              r.literal("<thought>\n");
              r.content(t.entry.text, SourceKind::kThought, e);
              r.literal("\n</thought>\n");
            },
            [&](const Query& q) {
              r.literal("<query>\n");
              r.content(query_text(q.query), SourceKind::kQuery, e);
              r.literal("\n</query>\n");
            },
            [&](const Answer& a) {
              r.literal("<answer>\n");
              r.content(a.text, SourceKind::kAnswer, e);
              r.literal("\n</answer>\n");
            },
        },
        elements[e]);
  }
  return r.take();
}

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_supervised(SourceKind kind) {
  return kind == SourceKind::kThought || kind == SourceKind::kAnswer;
}

json element_json(const SftElement& element) {
  return std::visit(
      Overloaded{
          [](const InitialMemory& m) {
            return json{{"kind", "initial_memory"},
                        {"entries", m.memory.entries}};
          },
          [](const FinalClip& c) {
            return json{{"kind", "final_clip"},
                        {"clip_index", c.clip_index},
                        {"start_s", to_seconds(c.start_time)},
                        {"end_s", to_seconds(c.end_time)},
                        {"visual_tokens", c.visual_tokens}};
          },
          [](const ClipTokens& c) {
            return json{{"kind", "clip"},
                        {"clip_index", c.clip_index},
                        {"start_s", to_seconds(c.start_time)},
                        {"end_s", to_seconds(c.end_time)},
                        {"visual_tokens", c.visual_tokens}};
          },
          [](const Thought& t) {
            json j = t.entry;
            j["kind"] = "thought";
            return j;
          },
          [](const Query& q) {
            json j = q.query;
            j["kind"] = "query";
            return j;
          },
          [](const Answer& a) {
            return json{{"kind", "answer"}, {"text", a.text}};
          },
      },
      element);
}

ClipTokens clip_tokens_from_json(const json& j) {
  ClipTokens c;
  c.clip_index = j.at("clip_index").get<int>();
  c.start_time = from_seconds(j.at("start_s").get<double>());
  c.end_time = from_seconds(j.at("end_s").get<double>());
  c.visual_tokens = j.at("visual_tokens").get<std::int64_t>();
  return c;
}

}  // namespace

ClipTokens clip_tokens(const Clip& clip) {
  return ClipTokens{clip.clip_index, clip.start_time, clip.end_time,
                    clip.total_visual_tokens};
}

std::string_view element_kind(const SftElement& element) {
  return std::visit(Overloaded{
                        [](const InitialMemory&) { return "initial_memory"; },
                        [](const FinalClip&) { return "final_clip"; },
                        [](const ClipTokens&) { return "clip"; },
                        [](const Thought&) { return "thought"; },
                        [](const Query&) { return "query"; },
                        [](const Answer&) { return "answer"; },
                    },
                    element);
}

std::vector<SftElement> SftSequence::elements() const {
  return flatten(initial_memory, pairs, tail);
}

std::vector<SftElement> SftSegment::elements() const {
  return flatten(carried_memory, pairs, tail);
}

SftSequence build_sequence(std::span<const Clip> clips,
                           std::span<const ThoughtEntry> thoughts,
                           QueryEvent query, std::string answer,
                           MemoryState initial_memory) {
  if (clips.empty()) throw StructureError("sequence needs a final clip");
  if (thoughts.size() + 1 != clips.size()) {
    throw StructureError("expected " + std::to_string(clips.size() - 1) +
                         " thoughts for " + std::to_string(clips.size()) +
                         " clips, got " + std::to_string(thoughts.size()));
  }
  for (std::size_t k = 1; k < clips.size(); ++k) {
    if (clips[k].clip_index != clips[k - 1].clip_index + 1) {
      throw StructureError("clip indices are not consecutive at clip " +
                           std::to_string(clips[k].clip_index));
    }
  }
  SftSequence seq;
  seq.initial_memory = std::move(initial_memory);
  for (std::size_t k = 0; k < thoughts.size(); ++k) {
    if (thoughts[k].clip_index != clips[k].clip_index) {
      throw StructureError("thought " + std::to_string(k + 1) +
                           " belongs to clip " +
                           std::to_string(thoughts[k].clip_index) +
                           ", expected " +
                           std::to_string(clips[k].clip_index));
    }
    seq.pairs.push_back({clip_tokens(clips[k]), thoughts[k]});
  }
  seq.tail.final_clip = FinalClip{clip_tokens(clips.back())};
  seq.tail.query = std::move(query);
  seq.tail.answer = std::move(answer);
  return seq;
}

TokenEstimator word_count_estimator(double factor) {
  if (!(factor > 0.0)) throw ParameterError("word factor must be positive");
  return [factor](std::string_view text) -> std::int64_t {
    std::int64_t words = 0;
    bool in_word = false;
    for (char c : text) {
      const bool space = is_space(c);
      if (!space && !in_word) ++words;
      in_word = !space;
    }
    return static_cast<std::int64_t>(
        std::ceil(static_cast<double>(words) * factor - 1e-9));
  };
}

std::vector<SftSegment> segment_sequence(const SftSequence& seq,
                                         std::int64_t max_tokens_per_segment,
                                         const TokenEstimator& estimate) {
  if (max_tokens_per_segment < 1) {
    throw ParameterError("max_tokens_per_segment must be >= 1");
  }
  auto pair_cost = [&](const SftPair& pair) {
    return pair.clip.visual_tokens + estimate(pair.thought.text);
  };
  const std::int64_t tail_cost = seq.tail.final_clip.visual_tokens +
                                 estimate(query_text(seq.tail.query)) +
                                 estimate(seq.tail.answer);

  std::vector<SftSegment> segments;
  MemoryState memory = seq.initial_memory;
  std::size_t k = 0;
  const std::size_t pair_count = seq.pairs.size();

  while (true) {
    SftSegment segment;
    segment.segment_index = static_cast<int>(segments.size()) + 1;
    segment.carried_memory = memory;
    segment.first_cutoff =
        k == 0 ? 0 : seq.pairs[k - 1].clip.clip_index;
    std::int64_t cost = estimate(render(memory));

    while (k < pair_count &&
           cost + pair_cost(seq.pairs[k]) <= max_tokens_per_segment) {
      cost += pair_cost(seq.pairs[k]);
      segment.pairs.push_back(seq.pairs[k]);
      ++k;
    }

    if (k < pair_count && segment.pairs.empty()) {
      const int clip = seq.pairs[k].clip.clip_index;
      throw InfeasibleError(
          clip, "clip/thought pair " + std::to_string(clip) +
                    " does not fit in " +
                    std::to_string(max_tokens_per_segment) +
                    " tokens with its carried memory");
    }

    const bool all_pairs_placed = k == pair_count;
    if (all_pairs_placed && cost + tail_cost <= max_tokens_per_segment) {
      segment.tail = seq.tail;
      cost += tail_cost;
    } else if (all_pairs_placed && segment.pairs.empty()) {
      throw InfeasibleError(std::nullopt,
                            "final clip, query and answer do not fit in " +
                                std::to_string(max_tokens_per_segment) +
                                " tokens with the carried memory");
    }

    segment.last_cutoff =
        segment.pairs.empty() ? segment.first_cutoff
                              : segment.pairs.back().clip.clip_index;
    segment.estimated_tokens = cost;
    const bool done = segment.tail.has_value();
    if (!done) memory = update(memory, thoughts_of(segment.pairs));
    segments.push_back(std::move(segment));
    if (done) break;
  }
  return segments;
}

RenderedSegment render_segment(const SftSegment& segment) {
  return render_elements(segment.elements());
}

RenderedSegment render_sequence(const SftSequence& seq) {
  return render_elements(seq.elements());
}

std::size_t LossMask::supervised_count() const {
  std::size_t n = 0;
  for (bool b : supervised) n += b ? 1 : 0;
  return n;
}

LossMask loss_mask(const SftSegment& segment,
                   const RenderedSegment& rendering) {
  const std::size_t element_count = segment.elements().size();
  for (const auto& span : rendering.spans) {
    if (span.element && *span.element >= element_count) {
      throw AttributionError("span attributed to element " +
                             std::to_string(*span.element) +
                             " but the segment has " +
                             std::to_string(element_count));
    }
  }

  LossMask mask;
  const std::string& text = rendering.text;
  std::size_t span_idx = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && !is_space(text[end])) ++end;

    // Spans are emitted in text order, so a forward scan finds the owner.
    while (span_idx < rendering.spans.size() &&
           rendering.spans[span_idx].end <= i) {
      ++span_idx;
    }
    if (span_idx == rendering.spans.size() ||
        rendering.spans[span_idx].begin > i) {
      throw AttributionError("token at offset " + std::to_string(i) +
                             " has no source element");
    }
    const auto& owner = rendering.spans[span_idx];
    if (end > owner.end) {
      throw AttributionError("token at offset " + std::to_string(i) +
                             " crosses a source boundary");
    }
    mask.tokens.push_back({i, end});
    mask.supervised.push_back(is_supervised(owner.kind));
    i = end;
  }
  return mask;
}

std::vector<TokenSpan> loss_spans(const RenderedSegment& rendering) {
  std::vector<TokenSpan> out;
  for (const auto& span : rendering.spans) {
    if (is_supervised(span.kind)) out.push_back({span.begin, span.end});
  }
  return out;
}

json segment_record(const SftSegment& segment) {
  const auto rendering = render_segment(segment);
  json elements = json::array();
  for (const auto& element : segment.elements()) {
    elements.push_back(element_json(element));
  }
  json spans = json::array();
  for (const auto& span : loss_spans(rendering)) {
    spans.push_back(json::array({span.begin, span.end}));
  }
  return json{{"segment_index", segment.segment_index},
              {"carried_memory", segment.carried_memory.entries},
              {"elements", std::move(elements)},
              {"loss_spans", std::move(spans)},
              {"cut_offs", json::array({segment.first_cutoff,
                                        segment.last_cutoff})},
              {"estimated_tokens", segment.estimated_tokens},
              {"rendered", rendering.text}};
}

SftSequence sequence_from_json(const json& j) {
  MemoryState memory;
  if (auto it = j.find("memory_budget_entries"); it != j.end()) {
    memory.budget_entries = it->get<std::size_t>();
  }
  if (auto it = j.find("memory_budget_chars"); it != j.end()) {
    memory.budget_chars = it->get<std::size_t>();
  }
  if (auto it = j.find("initial_memory"); it != j.end()) {
    memory.entries = it->get<std::vector<ThoughtEntry>>();
  }

  std::vector<Clip> clips;
  for (const auto& c : j.at("clips")) {
    const auto tokens = clip_tokens_from_json(c);
    Clip clip;
    clip.clip_index = tokens.clip_index;
    clip.start_time = tokens.start_time;
    clip.end_time = tokens.end_time;
    clip.total_visual_tokens = tokens.visual_tokens;
    clips.push_back(std::move(clip));
  }
  auto thoughts = j.at("thoughts").get<std::vector<ThoughtEntry>>();
  auto query = j.at("query").get<QueryEvent>();
  auto answer = j.at("answer").get<std::string>();
  return build_sequence(clips, thoughts, std::move(query), std::move(answer),
                        std::move(memory));
}

}  // namespace vst
