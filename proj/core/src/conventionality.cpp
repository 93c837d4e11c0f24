#include "idiomspace/conventionality.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "idiomspace/errors.hpp"

namespace idiomspace::conventionality {

namespace {

void check_uniform(std::span<const Vector> vectors, std::size_t dim) {
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw ContractError("embedding dimension " + std::to_string(v.size()) + " != " +
                          std::to_string(dim));
    }
  }
}

std::vector<providers::EmbeddingVector> embed_uses(
    const corpus::Corpus& corpus, const std::vector<std::pair<std::size_t, std::size_t>>& uses,
    providers::Provider& provider) {
  std::vector<providers::ProbeRequest> batch;
  batch.reserve(uses.size());
  for (const auto& [record, token] : uses) {
    const auto block = corpus::context_block(corpus, record);
    batch.push_back(providers::make_embed_request(block.tokens, block.focus_offset + token));
    batch.back().id = batch.size();
  }
  return providers::request_embeddings(provider, batch);
}

}  // namespace

const char* to_string(Group group) { return group == Group::target ? "target" : "matched"; }

Vector mean_embedding(std::span<const Vector> vectors) {
  if (vectors.empty()) throw InsufficientDataError("mean of an empty embedding set");
  const std::size_t d = vectors.front().size();
  check_uniform(vectors, d);
  Vector mu(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < d; ++k) mu[k] += v[k];
  }
  for (double& x : mu) x /= static_cast<double>(vectors.size());
  return mu;
}

Vector componentwise_std(std::span<const Vector> vectors, const Vector& mu) {
  if (vectors.size() < 2) {
    throw InsufficientDataError("standard deviation needs at least two embeddings, got " +
                                std::to_string(vectors.size()));
  }
  const std::size_t d = mu.size();
  check_uniform(vectors, d);
  Vector var(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < d; ++k) {
      const double e = v[k] - mu[k];
      var[k] += e * e;
    }
  }
  Vector sigma(d);
  for (std::size_t k = 0; k < d; ++k) {
    sigma[k] = std::max(std::sqrt(var[k] / static_cast<double>(vectors.size())), kSigmaFloor);
  }
  return sigma;
}

double conv_score(std::span<const Vector> targets, const Vector& mu, const Vector& sigma) {
  if (targets.empty()) throw InsufficientDataError("conventionality needs at least one in-phrase use");
  if (sigma.size() != mu.size()) throw ContractError("mu and sigma differ in dimension");
  check_uniform(targets, mu.size());
  double total = 0.0;
  for (const auto& t : targets) {
    double sq = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const double z = (t[k] - mu[k]) / sigma[k];
      sq += z * z;
    }
    total += std::sqrt(sq);
  }
  return -total / static_cast<double>(targets.size());
}

OccurrenceSet occurrence_set(const corpus::Corpus& corpus, const corpus::PhraseSpec& spec,
                             corpus::Slot slot,
                             std::span<const corpus::PhraseInstance> targets) {
  OccurrenceSet set;
  set.lemma = spec.lemma(slot);
  set.slot = slot;
  std::multimap<std::size_t, const corpus::PhraseInstance*> by_record;
  for (const auto& t : targets) by_record.emplace(t.record, &t);
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto [lo, hi] = by_record.equal_range(r);
    for (const auto& tok : corpus.at(r).tokens) {
      if (tok.lemma != set.lemma) continue;
      const bool inside = std::any_of(lo, hi, [&](const auto& entry) {
        return tok.index >= entry.second->span_start && tok.index <= entry.second->span_end;
      });
      if (!inside) set.uses.push_back({r, tok.index});
    }
  }
  return set;
}

ConventionalityScore score_phrase_slot(const corpus::Corpus& corpus,
                                       const corpus::PhraseSpec& spec,
                                       const treequery::InstanceSets& instances,
                                       corpus::Slot slot, Group group,
                                       providers::Provider& provider,
                                       const ScoreOptions& options) {
  ConventionalityScore score;
  score.phrase_id = spec.phrase_id;
  score.slot = slot;
  score.group = group;
  score.provenance = provider.handshake().provenance();

  const auto occurrences = occurrence_set(corpus, spec, slot, instances.target);
  const std::vector<corpus::PhraseInstance>* in_phrase = &instances.target;
  if (group == Group::matched) {
    in_phrase = slot == corpus::Slot::head ? &instances.head_matched : &instances.dep_matched;
  }
  score.n = occurrences.n();
  score.m = in_phrase->size();

  const std::size_t min_n = std::max<std::size_t>(options.min_occurrences, 2);
  if (score.n < min_n) {
    score.flagged = true;
    score.flag_reason = "only " + std::to_string(score.n) + " occurrences outside the phrase";
  } else if (score.m == 0) {
    score.flagged = true;
    score.flag_reason = "no in-phrase uses";
  }
  if (score.flagged) return score;

  std::vector<std::pair<std::size_t, std::size_t>> o_uses;
  o_uses.reserve(occurrences.n());
  for (const auto& u : occurrences.uses) o_uses.emplace_back(u.record, u.token);
  std::vector<std::pair<std::size_t, std::size_t>> t_uses;
  t_uses.reserve(score.m);
  for (const auto& inst : *in_phrase) {
    t_uses.emplace_back(inst.record, slot == corpus::Slot::head ? inst.head_index : inst.dep_index);
  }

  auto to_vectors = [](std::vector<providers::EmbeddingVector> e) {
    std::vector<Vector> out;
    out.reserve(e.size());
    for (auto& v : e) out.push_back(std::move(v.components));
    return out;
  };
  const auto o_vecs = to_vectors(embed_uses(corpus, o_uses, provider));
  const auto t_vecs = to_vectors(embed_uses(corpus, t_uses, provider));

  score.mu = mean_embedding(o_vecs);
  score.sigma = componentwise_std(o_vecs, score.mu);
  score.value = conv_score(t_vecs, score.mu, score.sigma);
  return score;
}

std::optional<double> phrase_conventionality(const ConventionalityScore& head,
                                             const ConventionalityScore& dep) {
  if (head.flagged || dep.flagged) return std::nullopt;
  return phrase_conventionality(head.value, dep.value);
}

double phrase_conventionality(double head, double dep) { return 0.5 * (head + dep); }

}  // namespace idiomspace::conventionality
