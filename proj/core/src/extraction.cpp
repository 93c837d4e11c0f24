#include "idiomspace/extraction.hpp"

#include <algorithm>
#include <set>

namespace idiomspace::treequery {

using corpus::MatchClass;
using corpus::NodeId;
using corpus::PhraseInstance;
using corpus::PhraseType;
using corpus::Slot;

namespace {

bool is_noun(const std::string& label) { return label.rfind("NN", 0) == 0; }

// The rightmost noun preterminal dominated by the parent of `node`.
bool is_rightmost_noun(const corpus::ParseTree& tree, NodeId node) {
  const auto& parent = tree.node(node).parent;
  if (!parent) return true;
  NodeId last = node;
  for (NodeId id = *parent + 1; id < tree.size() && tree.dominates(*parent, id); ++id) {
    if (tree.is_preterminal(id) && is_noun(tree.node(id).label)) last = id;
  }
  return last == node;
}

}  // namespace

PhrasePattern::PhrasePattern(corpus::PhraseSpec spec)
    : spec_(std::move(spec)), query_(compile_query(spec_.query)) {}

std::vector<PhraseInstance> PhrasePattern::structural_matches(const corpus::Corpus& corpus,
                                                              std::size_t record) const {
  const auto& rec = corpus.at(record);
  const auto& tree = rec.tree;
  std::vector<PhraseInstance> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& b : match_all(query_, rec)) {
    const NodeId h = b.at("head");
    const NodeId d = b.at("dep");
    if (!tree.is_preterminal(h) || !tree.is_preterminal(d) || h == d) continue;
    if (spec_.phrase_type == PhraseType::B && tree.node(h).label != tree.node(d).label) continue;
    if (spec_.default_query && spec_.phrase_type != PhraseType::B) {
      // The NP's head noun is the object for VO and the head slot otherwise.
      const NodeId np_head = spec_.phrase_type == PhraseType::VO ? d : h;
      if (!is_rightmost_noun(tree, np_head)) continue;
    }
    PhraseInstance inst;
    inst.phrase_id = spec_.phrase_id;
    inst.record = record;
    inst.head_index = *tree.node(h).leaf_token;
    inst.dep_index = *tree.node(d).leaf_token;
    inst.span_start = std::min(inst.head_index, inst.dep_index);
    inst.span_end = std::max(inst.head_index, inst.dep_index);
    if (!seen.emplace(inst.head_index, inst.dep_index).second) continue;
    out.push_back(std::move(inst));
  }
  return out;
}

InstanceSets extract_all(const corpus::Corpus& corpus, const PhrasePattern& pattern) {
  InstanceSets sets;
  const auto& spec = pattern.spec();
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto& tokens = corpus.at(r).tokens;
    for (auto inst : pattern.structural_matches(corpus, r)) {
      const bool head_ok = tokens[inst.head_index].lemma == spec.head_lemma;
      const bool dep_ok = tokens[inst.dep_index].lemma == spec.dep_lemma;
      if (head_ok && dep_ok) {
        inst.match_class = MatchClass::target;
        sets.target.push_back(std::move(inst));
      } else if (head_ok) {
        inst.match_class = MatchClass::head_matched;
        sets.head_matched.push_back(std::move(inst));
      } else if (dep_ok) {
        inst.match_class = MatchClass::dep_matched;
        sets.dep_matched.push_back(std::move(inst));
      }
    }
  }
  return sets;
}

std::vector<PhraseInstance> extract_instances(const corpus::Corpus& corpus,
                                              const PhrasePattern& pattern) {
  return extract_all(corpus, pattern).target;
}

std::vector<PhraseInstance> extract_instances(const corpus::Corpus& corpus,
                                              const corpus::PhraseSpec& spec) {
  return extract_instances(corpus, PhrasePattern(spec));
}

std::vector<PhraseInstance> extract_matched(const corpus::Corpus& corpus,
                                            const PhrasePattern& pattern, Slot fixed_slot) {
  auto sets = extract_all(corpus, pattern);
  return fixed_slot == Slot::head ? std::move(sets.head_matched) : std::move(sets.dep_matched);
}

std::vector<PhraseInstance> extract_matched(const corpus::Corpus& corpus,
                                            const corpus::PhraseSpec& spec, Slot fixed_slot) {
  return extract_matched(corpus, PhrasePattern(spec), fixed_slot);
}

}  // namespace idiomspace::treequery
