#ifndef IDIOMSPACE_CONTINGENCY_HPP
#define IDIOMSPACE_CONTINGENCY_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idiomspace/corpus.hpp"
#include "idiomspace/providers.hpp"

namespace idiomspace::contingency {

/// Neutral paragraph prepended to every probe unless the caller supplies one.
std::string_view default_padding();

/// Whitespace tokenization of padding text.
std::vector<std::string> padding_tokens(std::string_view text);

struct ContingencyScore {
  std::string phrase_id;
  corpus::MatchClass match_class = corpus::MatchClass::target;
  std::size_t record = 0;
  std::size_t span_start = 0;
  std::size_t span_end = 0;
  double value = 0.0;          // joint_logprob - sum(marginal_logprobs), natural log
  double joint_logprob = 0.0;  // log p(x1..xn | c)
  std::vector<double> marginal_logprobs;  // log p(xi | c), aligned with span words

  std::size_t n_span_words() const noexcept { return marginal_logprobs.size(); }
};

/// Probe sequence for a span [span_start, span_end] of `tokens`: first the
/// chain-rule factors issued right to left (word i predicted with the span
/// words after it masked), then the marginals (word i with every other span
/// word masked), also right to left.
std::vector<providers::ProbeRequest> span_requests(std::span<const std::string> tokens,
                                                   std::size_t span_start, std::size_t span_end);

/// Generalized PMI of a span given the rest of `tokens` as context. Throws
/// ContractError for spans shorter than two words.
ContingencyScore span_contingency(providers::Provider& provider,
                                  std::span<const std::string> tokens, std::size_t span_start,
                                  std::size_t span_end);

/// Probe tokens for an instance: padding, previous sentence, the sentence,
/// next sentence. `span_offset` locates the sentence's first token.
struct ProbeContext {
  std::vector<std::string> tokens;
  std::size_t sentence_offset = 0;
};
ProbeContext probe_context(const corpus::Corpus& corpus, std::size_t record,
                           std::span<const std::string> padding);

ContingencyScore instance_contingency(providers::Provider& provider, const corpus::Corpus& corpus,
                                      const corpus::PhraseInstance& instance,
                                      std::span<const std::string> padding);

/// Mean of instance values. Throws InsufficientDataError when empty.
double phrase_contingency(std::span<const ContingencyScore> scores);
double phrase_contingency(std::span<const double> values);

}  // namespace idiomspace::contingency

#endif  // IDIOMSPACE_CONTINGENCY_HPP
