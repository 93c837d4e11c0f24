#ifndef IDIOMSPACE_ORACLE_LM_HPP
#define IDIOMSPACE_ORACLE_LM_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "idiomspace/corpus.hpp"
#include "idiomspace/providers.hpp"

namespace idiomspace::oracle_lm {

inline constexpr const char* kUnknownWord = "<unk>";
inline constexpr std::size_t kDefaultEnumerationCeiling = 1'000'000;

/// First-order Markov chain over a closed vocabulary. Immutable once built.
/// If the vocabulary contains `<unk>`, out-of-vocabulary words map onto it;
/// otherwise they are rejected.
class MarkovModel {
 public:
  /// Validates: non-empty unique vocabulary, entries >= 0, initial vector and
  /// every transition row summing to 1 within 1e-12.
  MarkovModel(std::vector<std::string> vocabulary, std::vector<double> initial,
              std::vector<std::vector<double>> transitions);

  /// All rows identical and uniform: every word independent of its context.
  static MarkovModel uniform(std::vector<std::string> vocabulary);

  std::size_t size() const noexcept { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  double initial(std::size_t w) const { return initial_.at(w); }
  double transition(std::size_t from, std::size_t to) const { return transitions_[from * size() + to]; }

  /// Vocabulary id of `word`, falling back to `<unk>`; nullopt if neither.
  std::optional<std::size_t> lookup(std::string_view word) const;
  /// As lookup, but throws ValidationError for an unknown word.
  std::size_t id(std::string_view word) const;

  /// Text form read by parse(); round-trips exactly.
  std::string serialize() const;
  static MarkovModel parse(std::istream& in);
  static MarkovModel load(const std::filesystem::path& path);

 private:
  std::vector<std::string> vocabulary_;
  std::vector<double> initial_;
  std::vector<double> transitions_;  // row-major V x V
  std::unordered_map<std::string, std::size_t> index_;
  std::optional<std::size_t> unk_;
};

/// log P(tokens) = log initial(t0) + sum of log transitions.
double exact_joint(const MarkovModel& model, std::span<const std::string> tokens);

/// log P(tokens[target] | unmasked tokens other than the target), by summing
/// exact_joint over every completion of the masked positions and the target.
/// Throws EnumerationLimitError when V^(#free positions) exceeds `ceiling`.
double exact_conditional(const MarkovModel& model, std::span<const std::string> tokens,
                         const std::vector<bool>& mask, std::size_t target_index,
                         std::size_t ceiling = kDefaultEnumerationCeiling);

/// Same quantity as exact_conditional computed by a clamped forward-backward
/// pass; linear in sequence length and usable for any number of masks.
double chain_conditional(const MarkovModel& model, std::span<const std::string> tokens,
                         const std::vector<bool>& mask, std::size_t target_index);

struct EstimateOptions {
  std::size_t min_count = 2;
  std::size_t max_vocabulary = 4096;
  double smoothing = 0.05;  // add-k on transitions and initial distribution
};

/// Maximum-likelihood bigram chain over each document's running token stream
/// (surface forms), with add-k smoothing. Rare words collapse into `<unk>`.
MarkovModel estimate(const corpus::Corpus& corpus, const EstimateOptions& options = {});

/// 2V-dimensional signature: co-occurrence counts of vocabulary words within
/// +-window of the target (first V components) followed by a one-hot identity
/// block for the target word. Words the model cannot map are ignored.
std::vector<double> count_signature(const MarkovModel& model, std::span<const std::string> tokens,
                                    std::size_t target_index, std::size_t window);

/// count_signature over the sentence's context block (+-1 sentence).
providers::EmbeddingVector count_embedding(const MarkovModel& model, const corpus::Corpus& corpus,
                                           std::size_t record, std::size_t target_index,
                                           std::size_t window);

/// The built-in provider: condprob from the Markov chain, embed from count
/// signatures.
class ToyProvider final : public providers::Provider {
 public:
  enum class Route { forward_backward, enumeration };

  ToyProvider(MarkovModel model, std::size_t window, Route route = Route::forward_backward);

  const MarkovModel& model() const noexcept { return model_; }
  providers::Handshake handshake() const override { return handshake_; }
  std::vector<providers::ProbeResponse> submit(
      std::span<const providers::ProbeRequest> batch) override;

 private:
  providers::ProbeResponse answer(const providers::ProbeRequest& request) const;

  MarkovModel model_;
  std::size_t window_;
  Route route_;
  providers::Handshake handshake_;
};

}  // namespace idiomspace::oracle_lm

#endif  // IDIOMSPACE_ORACLE_LM_HPP
