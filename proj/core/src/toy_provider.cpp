#include "idiomspace/digest.hpp"
#include "idiomspace/errors.hpp"
#include "idiomspace/oracle_lm.hpp"

namespace idiomspace::oracle_lm {

std::vector<double> count_signature(const MarkovModel& model, std::span<const std::string> tokens,
                                    std::size_t target_index, std::size_t window) {
  if (window == 0) throw ContractError("embedding window must be at least 1");
  if (target_index >= tokens.size()) throw ContractError("embedding target out of range");
  const std::size_t v = model.size();
  std::vector<double> sig(2 * v, 0.0);
  const std::size_t lo = target_index >= window ? target_index - window : 0;
  const std::size_t hi = std::min(tokens.size() - 1, target_index + window);
  for (std::size_t j = lo; j <= hi; ++j) {
    if (j == target_index) continue;
    if (auto w = model.lookup(tokens[j])) sig[*w] += 1.0;
  }
  if (auto w = model.lookup(tokens[target_index])) sig[v + *w] = 1.0;
  return sig;
}

providers::EmbeddingVector count_embedding(const MarkovModel& model, const corpus::Corpus& corpus,
                                           std::size_t record, std::size_t target_index,
                                           std::size_t window) {
  const auto block = corpus::context_block(corpus, record);
  if (target_index >= block.focus_length) throw ContractError("embedding target out of range");
  return {count_signature(model, block.tokens, block.focus_offset + target_index, window), ""};
}

ToyProvider::ToyProvider(MarkovModel model, std::size_t window, Route route)
    : model_(std::move(model)), window_(window), route_(route) {
  if (window_ == 0) throw ConfigError("embedding window must be at least 1");
  handshake_.dimension = 2 * model_.size();
  handshake_.provider_name = "toy-markov";
  const std::string config = model_.serialize() + "window " + std::to_string(window_) + "\nroute " +
                             (route_ == Route::enumeration ? "enumeration" : "forward_backward") +
                             "\n";
  handshake_.config_fingerprint = sha256_hex(config).substr(0, 16);
}

providers::ProbeResponse ToyProvider::answer(const providers::ProbeRequest& req) const {
  providers::ProbeResponse resp;
  resp.id = req.id;
  try {
    providers::validate(req);
    if (req.kind == providers::ProbeKind::embed) {
      resp.vector = count_signature(model_, req.tokens, req.target_index, window_);
    } else {
      const double lp = route_ == Route::enumeration
                            ? exact_conditional(model_, req.tokens, req.mask, req.target_index)
                            : chain_conditional(model_, req.tokens, req.mask, req.target_index);
      // Rounding can leave a certain event a hair above zero.
      resp.logprob = std::min(lp, 0.0);
    }
    resp.ok = true;
  } catch (const std::exception& e) {
    resp.ok = false;
    resp.error = e.what();
  }
  return resp;
}

std::vector<providers::ProbeResponse> ToyProvider::submit(
    std::span<const providers::ProbeRequest> batch) {
  std::vector<providers::ProbeResponse> out;
  out.reserve(batch.size());
  for (const auto& r : batch) out.push_back(answer(r));
  return out;
}

}  // namespace idiomspace::oracle_lm
