#ifndef IDIOMSPACE_CONVENTIONALITY_HPP
#define IDIOMSPACE_CONVENTIONALITY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idiomspace/corpus.hpp"
#include "idiomspace/extraction.hpp"
#include "idiomspace/providers.hpp"

namespace idiomspace::conventionality {

using Vector = std::vector<double>;

inline constexpr double kSigmaFloor = 1e-8;
inline constexpr std::size_t kDefaultMinOccurrences = 10;

/// Component-wise arithmetic mean. Throws InsufficientDataError on an empty
/// list and ContractError on ragged input.
Vector mean_embedding(std::span<const Vector> vectors);

/// Component-wise population standard deviation around `mu`, each component
/// floored at kSigmaFloor. Needs at least two vectors.
Vector componentwise_std(std::span<const Vector> vectors, const Vector& mu);

/// -(1/m) * sum_i || (T_i - mu) / sigma ||_2 with component-wise division.
double conv_score(std::span<const Vector> targets, const Vector& mu, const Vector& sigma);

/// Which instances supply the in-phrase uses T.
enum class Group { target, matched };
const char* to_string(Group group);

/// Uses of a lemma outside every target instance of one phrase.
struct OccurrenceSet {
  std::string lemma;
  corpus::Slot slot = corpus::Slot::head;
  struct Use {
    std::size_t record;
    std::size_t token;
    bool operator==(const Use&) const = default;
  };
  std::vector<Use> uses;
  std::size_t n() const noexcept { return uses.size(); }
};

/// All tokens whose lemma is spec.lemma(slot), skipping any token inside the
/// span of one of `targets`.
OccurrenceSet occurrence_set(const corpus::Corpus& corpus, const corpus::PhraseSpec& spec,
                             corpus::Slot slot,
                             std::span<const corpus::PhraseInstance> targets);

struct ConventionalityScore {
  std::string phrase_id;
  corpus::Slot slot = corpus::Slot::head;
  Group group = Group::target;
  Vector mu;
  Vector sigma;
  std::size_t n = 0;
  std::size_t m = 0;
  double value = 0.0;  // meaningful only when !flagged
  bool flagged = false;
  std::string flag_reason;
  std::string provenance;
};

struct ScoreOptions {
  std::size_t min_occurrences = kDefaultMinOccurrences;
};

/// Conventionality of one slot of one phrase. The occurrence set is the
/// lemma's uses outside target instances; the in-phrase uses are the slot's
/// tokens in target instances (Group::target) or in the instances that hold
/// that slot fixed (Group::matched: head_matched for head, dep_matched for
/// dep). Each use is embedded with its +-1 sentence context. Too few
/// occurrences (n < min_occurrences) or no in-phrase uses flags the result
/// instead of throwing.
ConventionalityScore score_phrase_slot(const corpus::Corpus& corpus,
                                       const corpus::PhraseSpec& spec,
                                       const treequery::InstanceSets& instances,
                                       corpus::Slot slot, Group group,
                                       providers::Provider& provider,
                                       const ScoreOptions& options = {});

/// Mean of head and dep values; nullopt if either is flagged.
std::optional<double> phrase_conventionality(const ConventionalityScore& head,
                                             const ConventionalityScore& dep);
double phrase_conventionality(double head, double dep);

}  // namespace idiomspace::conventionality

#endif  // IDIOMSPACE_CONVENTIONALITY_HPP
