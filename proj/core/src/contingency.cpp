#include "idiomspace/contingency.hpp"

#include <sstream>

#include "idiomspace/errors.hpp"

namespace idiomspace::contingency {

std::string_view default_padding() {
  // Kept in sync with data/padding.txt.
  static constexpr std::string_view kPadding =
      "The town sits at the edge of a wide valley where two small rivers meet . "
      "Most of the houses are built from grey stone , and the main street runs "
      "from the old market hall down to the bridge . In the mornings people walk "
      "to work or wait for the bus near the library , and in the evenings the "
      "square fills with families , students and visitors . The weather changes "
      "quickly in spring , so many residents carry a coat even on bright days . "
      "Every year the council publishes a short report on roads , schools and "
      "local services .";
  return kPadding;
}

std::vector<std::string> padding_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<providers::ProbeRequest> span_requests(std::span<const std::string> tokens,
                                                   std::size_t span_start, std::size_t span_end) {
  if (span_end >= tokens.size() || span_start > span_end) {
    throw ContractError("span [" + std::to_string(span_start) + ", " + std::to_string(span_end) +
                        "] out of range");
  }
  if (span_end == span_start) throw ContractError("contingency is undefined for a single word");
  const std::vector<bool> clear(tokens.size(), false);
  std::vector<providers::ProbeRequest> batch;
  // Chain rule, right to left: p(x_i | x_s..x_{i-1}, c) with x_{i+1}..x_e hidden.
  for (std::size_t i = span_end + 1; i-- > span_start;) {
    std::vector<bool> mask = clear;
    for (std::size_t j = i + 1; j <= span_end; ++j) mask[j] = true;
    batch.push_back(providers::make_condprob_request(tokens, mask, i));
  }
  // Marginals: p(x_i | c) with every other span word hidden.
  for (std::size_t i = span_end + 1; i-- > span_start;) {
    std::vector<bool> mask = clear;
    for (std::size_t j = span_start; j <= span_end; ++j) mask[j] = j != i;
    batch.push_back(providers::make_condprob_request(tokens, mask, i));
  }
  for (std::size_t k = 0; k < batch.size(); ++k) batch[k].id = k + 1;
  return batch;
}

ContingencyScore span_contingency(providers::Provider& provider,
                                  std::span<const std::string> tokens, std::size_t span_start,
                                  std::size_t span_end) {
  const auto batch = span_requests(tokens, span_start, span_end);
  const auto lps = providers::request_condprobs(provider, batch);
  const std::size_t n = span_end - span_start + 1;

  ContingencyScore score;
  score.span_start = span_start;
  score.span_end = span_end;
  // lps[0..n) are chain factors for words e..s; lps[n..2n) marginals for e..s.
  score.joint_logprob = 0.0;
  for (std::size_t k = 0; k < n; ++k) score.joint_logprob += lps[k];
  score.marginal_logprobs.resize(n);
  for (std::size_t k = 0; k < n; ++k) score.marginal_logprobs[n - 1 - k] = lps[n + k];
  double marginal_sum = 0.0;
  for (double m : score.marginal_logprobs) marginal_sum += m;
  score.value = score.joint_logprob - marginal_sum;
  return score;
}

ProbeContext probe_context(const corpus::Corpus& corpus, std::size_t record,
                           std::span<const std::string> padding) {
  ProbeContext ctx;
  ctx.tokens.assign(padding.begin(), padding.end());
  const auto block = corpus::context_block(corpus, record);
  ctx.sentence_offset = ctx.tokens.size() + block.focus_offset;
  ctx.tokens.insert(ctx.tokens.end(), block.tokens.begin(), block.tokens.end());
  return ctx;
}

ContingencyScore instance_contingency(providers::Provider& provider, const corpus::Corpus& corpus,
                                      const corpus::PhraseInstance& instance,
                                      std::span<const std::string> padding) {
  const auto ctx = probe_context(corpus, instance.record, padding);
  auto score = span_contingency(provider, ctx.tokens, ctx.sentence_offset + instance.span_start,
                                ctx.sentence_offset + instance.span_end);
  score.phrase_id = instance.phrase_id;
  score.match_class = instance.match_class;
  score.record = instance.record;
  score.span_start = instance.span_start;
  score.span_end = instance.span_end;
  return score;
}

double phrase_contingency(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("no contingency scores to average");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double phrase_contingency(std::span<const ContingencyScore> scores) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.value);
  return phrase_contingency(values);
}

}  // namespace idiomspace::contingency
