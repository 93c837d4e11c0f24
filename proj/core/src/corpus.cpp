#include "idiomspace/corpus.hpp"

#include <algorithm>

#include "idiomspace/errors.hpp"

namespace idiomspace::corpus {

NodeId ParseTree::add_internal(std::string label, std::optional<NodeId> parent) {
  const NodeId id = nodes_.size();
  nodes_.push_back(Node{std::move(label), {}, std::nullopt, parent});
  if (parent) nodes_.at(*parent).children.push_back(id);
  return id;
}

NodeId ParseTree::add_preterminal(std::string label, std::size_t token,
                                  std::optional<NodeId> parent) {
  const NodeId id = nodes_.size();
  nodes_.push_back(Node{std::move(label), {}, token, parent});
  if (parent) nodes_.at(*parent).children.push_back(id);
  return id;
}

std::vector<std::size_t> ParseTree::yield(NodeId id) const {
  std::vector<std::size_t> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    const Node& n = nodes_.at(cur);
    if (n.leaf_token) {
      out.push_back(*n.leaf_token);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool ParseTree::dominates(NodeId ancestor, NodeId descendant) const {
  auto p = nodes_.at(descendant).parent;
  while (p) {
    if (*p == ancestor) return true;
    p = nodes_[*p].parent;
  }
  return false;
}

Corpus::Corpus(std::vector<SentenceRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    auto [it, inserted] = index_.emplace(std::make_pair(r.doc_id, r.sent_index), i);
    if (!inserted) {
      throw ValidationError("duplicate sentence " + r.doc_id + "#" +
                            std::to_string(r.sent_index));
    }
    for (auto link : {r.prev_id, r.next_id}) {
      if (link && (*link >= records_.size() || records_[*link].doc_id != r.doc_id)) {
        throw ValidationError("neighbour link of " + r.doc_id + "#" +
                              std::to_string(r.sent_index) + " leaves its document");
      }
    }
  }
}

std::optional<std::size_t> Corpus::find(std::string_view doc_id, std::size_t sent_index) const {
  auto it = index_.find(std::make_pair(std::string(doc_id), sent_index));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string ContextBlock::text() const {
  std::string out;
  for (std::size_t s = 0; s < sentence_starts.size(); ++s) {
    const std::size_t begin = sentence_starts[s];
    const std::size_t end = s + 1 < sentence_starts.size() ? sentence_starts[s + 1] : tokens.size();
    if (!out.empty()) out += ' ';
    out += "<s>";
    for (std::size_t i = begin; i < end; ++i) {
      out += ' ';
      out += tokens[i];
    }
    out += " </s>";
  }
  return out;
}

ContextBlock context_block(const Corpus& corpus, std::size_t record) {
  const SentenceRecord& rec = corpus.at(record);
  ContextBlock block;
  auto append = [&block](const SentenceRecord& r) {
    block.sentence_starts.push_back(block.tokens.size());
    for (const Token& t : r.tokens) block.tokens.push_back(t.surface);
  };
  if (rec.prev_id) append(corpus.at(*rec.prev_id));
  block.focus_offset = block.tokens.size();
  block.focus_length = rec.tokens.size();
  append(rec);
  if (rec.next_id) append(corpus.at(*rec.next_id));
  return block;
}

const char* to_string(PhraseType type) {
  switch (type) {
    case PhraseType::VO: return "VO";
    case PhraseType::AN: return "AN";
    case PhraseType::NN: return "NN";
    case PhraseType::B: return "B";
  }
  return "?";
}

std::optional<PhraseType> parse_phrase_type(std::string_view text) {
  if (text == "VO") return PhraseType::VO;
  if (text == "AN") return PhraseType::AN;
  if (text == "NN") return PhraseType::NN;
  if (text == "B") return PhraseType::B;
  return std::nullopt;
}

const char* to_string(Slot slot) { return slot == Slot::head ? "head" : "dep"; }

std::optional<Slot> parse_slot(std::string_view text) {
  if (text == "head") return Slot::head;
  if (text == "dep") return Slot::dep;
  return std::nullopt;
}

const char* to_string(MatchClass cls) {
  switch (cls) {
    case MatchClass::target: return "target";
    case MatchClass::head_matched: return "head_matched";
    case MatchClass::dep_matched: return "dep_matched";
  }
  return "?";
}

std::optional<MatchClass> parse_match_class(std::string_view text) {
  if (text == "target") return MatchClass::target;
  if (text == "head_matched") return MatchClass::head_matched;
  if (text == "dep_matched") return MatchClass::dep_matched;
  return std::nullopt;
}

}  // namespace idiomspace::corpus
