#ifndef IDIOMSPACE_EXTRACTION_HPP
#define IDIOMSPACE_EXTRACTION_HPP

#include <vector>

#include "idiomspace/corpus.hpp"
#include "idiomspace/treequery.hpp"

namespace idiomspace::treequery {

/// A phrase spec together with its compiled query.
class PhrasePattern {
 public:
  explicit PhrasePattern(corpus::PhraseSpec spec);

  const corpus::PhraseSpec& spec() const noexcept { return spec_; }
  const TreeQuery& query() const noexcept { return query_; }

  /// Instances of the query's structure in one sentence, whatever their
  /// lemmas. Head and dep captures must be preterminals; binomials need equal
  /// conjunct labels; for default queries a noun head of an NP must be the
  /// NP's rightmost noun preterminal. Deduplicated on (head, dep).
  std::vector<corpus::PhraseInstance> structural_matches(const corpus::Corpus& corpus,
                                                         std::size_t record) const;

 private:
  corpus::PhraseSpec spec_;
  TreeQuery query_;
};

std::vector<corpus::PhraseInstance> extract_instances(const corpus::Corpus& corpus,
                                                      const PhrasePattern& pattern);
std::vector<corpus::PhraseInstance> extract_instances(const corpus::Corpus& corpus,
                                                      const corpus::PhraseSpec& spec);

/// Control occurrences: `fixed_slot` keeps the spec's lemma, the other slot
/// holds any different lemma. fixed_slot == head yields head_matched.
std::vector<corpus::PhraseInstance> extract_matched(const corpus::Corpus& corpus,
                                                    const PhrasePattern& pattern,
                                                    corpus::Slot fixed_slot);
std::vector<corpus::PhraseInstance> extract_matched(const corpus::Corpus& corpus,
                                                    const corpus::PhraseSpec& spec,
                                                    corpus::Slot fixed_slot);

struct InstanceSets {
  std::vector<corpus::PhraseInstance> target;
  std::vector<corpus::PhraseInstance> head_matched;
  std::vector<corpus::PhraseInstance> dep_matched;
};

/// All three classes in one corpus pass.
InstanceSets extract_all(const corpus::Corpus& corpus, const PhrasePattern& pattern);

}  // namespace idiomspace::treequery

#endif  // IDIOMSPACE_EXTRACTION_HPP
