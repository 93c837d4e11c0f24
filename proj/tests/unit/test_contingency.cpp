#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "idiomspace/contingency.hpp"
#include "idiomspace/errors.hpp"
#include "idiomspace/extraction.hpp"
#include "idiomspace/oracle_lm.hpp"
#include "oracles.hpp"
#include "paths.hpp"

using namespace idiomspace;
using namespace idiomspace::contingency;
using oracle_lm::MarkovModel;
using oracle_lm::ToyProvider;

namespace {

std::vector<std::string> random_tokens(std::mt19937_64& rng, const MarkovModel& m, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(m.vocabulary()[rng() % m.size()]);
  return out;
}

MarkovModel vocabulary_of(const corpus::Corpus& c) {
  std::vector<std::string> vocab;
  for (const auto& r : c.records()) {
    for (const auto& t : r.tokens) vocab.push_back(t.surface);
  }
  for (const auto& w : padding_tokens(default_padding())) vocab.push_back(w);
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return MarkovModel::uniform(vocab);
}

}  // namespace

TEST_SUITE("contingency") {

TEST_CASE("independent words have zero contingency") {
  ToyProvider p(MarkovModel::uniform({"a", "b", "c", "d", "e"}), 2);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    const auto t = random_tokens(rng, p.model(), n);
    const std::size_t s = rng() % (n - 1);
    const std::size_t e = s + 1 + rng() % (n - s - 1);
    CHECK(std::abs(span_contingency(p, t, s, e).value) < 1e-9);
  }
}

TEST_CASE("two-state chain with a strong preference") {
  const MarkovModel m({"a", "b"}, {0.5, 0.5}, {{0.1, 0.9}, {0.3, 0.7}});
  ToyProvider p(m, 1);
  const std::vector<std::string> t = {"a", "b"};
  const auto score = span_contingency(p, t, 0, 1);
  // P(a, b) = 0.45; P(a) = 0.5; P(b) = 0.5 * 0.9 + 0.5 * 0.7 = 0.8.
  CHECK(std::abs(score.value - std::log(0.45 / (0.5 * 0.8))) < 1e-12);
  CHECK(std::abs(score.joint_logprob - std::log(0.45)) < 1e-12);
  const auto pmi = oracle::span_pmi(m, t, 0, 1);
  CHECK(std::abs(score.value - pmi.value) < 1e-9);
  CHECK(score.value > 0.0);
}

TEST_CASE("agrees with the enumeration oracle on random chains") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = oracle::random_model(rng, 2 + rng() % 5);
    const std::size_t n = 2 + rng() % 6;
    const auto t = random_tokens(rng, m, n);
    const std::size_t s = rng() % (n - 1);
    const std::size_t e = std::min(n - 1, s + 1 + rng() % 3);
    const auto pmi = oracle::span_pmi(m, t, s, e);
    for (auto route : {ToyProvider::Route::forward_backward, ToyProvider::Route::enumeration}) {
      ToyProvider p(m, 1, route);
      const auto score = span_contingency(p, t, s, e);
      CHECK(std::abs(score.value - pmi.value) < 1e-9);
      CHECK(std::abs(score.joint_logprob - pmi.joint) < 1e-9);
      REQUIRE(score.marginal_logprobs.size() == pmi.marginals.size());
      for (std::size_t k = 0; k < pmi.marginals.size(); ++k) {
        CHECK(std::abs(score.marginal_logprobs[k] - pmi.marginals[k]) < 1e-9);
      }
    }
  }
}

TEST_CASE("stored value is exactly joint minus the marginal sum") {
  std::mt19937_64 rng(3);
  const auto m = oracle::random_model(rng, 6);
  ToyProvider p(m, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_tokens(rng, m, 7);
    const auto score = span_contingency(p, t, 2, 2 + 1 + rng() % 3);
    double sum = 0.0;
    for (double x : score.marginal_logprobs) {
      CHECK(x <= 0.0);
      sum += x;
    }
    CHECK(score.joint_logprob <= 0.0);
    CHECK(score.value == score.joint_logprob - sum);
  }
}

TEST_CASE("requests run right to left with trailing span words hidden") {
  const std::vector<std::string> t = {"c0", "x1", "x2", "x3", "c4"};
  const auto batch = span_requests(t, 1, 3);
  REQUIRE(batch.size() == 6);
  const std::vector<std::size_t> targets = {3, 2, 1, 3, 2, 1};
  const std::vector<std::vector<bool>> masks = {
      {false, false, false, false, false}, {false, false, false, true, false},
      {false, false, true, true, false},   {false, true, true, false, false},
      {false, true, false, true, false},   {false, false, true, true, false},
  };
  for (std::size_t k = 0; k < batch.size(); ++k) {
    CAPTURE(k);
    CHECK(batch[k].kind == providers::ProbeKind::condprob);
    CHECK(batch[k].tokens == t);
    CHECK(batch[k].target_index == targets[k]);
    CHECK(batch[k].mask == masks[k]);
    CHECK(batch[k].id == k + 1);
  }
}

TEST_CASE("spans shorter than two words are rejected") {
  ToyProvider p(MarkovModel::uniform({"a", "b"}), 1);
  const std::vector<std::string> t = {"a", "b", "a"};
  CHECK_THROWS_AS(span_contingency(p, t, 1, 1), ContractError);
  CHECK_THROWS_AS(span_contingency(p, t, 2, 1), ContractError);
  CHECK_THROWS_AS(span_contingency(p, t, 1, 3), ContractError);
}

TEST_CASE("phrase contingency is the instance mean") {
  CHECK(phrase_contingency(std::vector<double>{1.0, 3.0}) == 2.0);
  CHECK(phrase_contingency(std::vector<double>{-0.25}) == -0.25);
  CHECK_THROWS_AS(phrase_contingency(std::vector<double>{}), InsufficientDataError);
  std::vector<ContingencyScore> scores(2);
  scores[0].value = 0.5;
  scores[1].value = 1.5;
  CHECK(phrase_contingency(scores) == 1.0);
}

TEST_CASE("padding paragraph") {
  const auto words = padding_tokens(default_padding());
  CHECK(words.size() >= 80);
  CHECK(words.size() <= 140);
  std::ifstream in(paths::data("padding.txt"));
  REQUIRE(in);
  std::stringstream file;
  file << in.rdbuf();
  CHECK(padding_tokens(file.str()) == words);
  CHECK(padding_tokens("  a \n b\t c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(padding_tokens("").empty());
}

TEST_CASE("probe context is padding, previous, sentence, next") {
  std::istringstream in(
      "#doc a\n(S (NN one) (NN two))\n(S (NN three) (NN four))\n(S (NN five))\n"
      "#doc b\n(S (NN six) (NN seven))\n");
  const auto c = corpus::read_treebank(in);
  const std::vector<std::string> pad = {"p", "q"};
  const auto mid = probe_context(c, 1, pad);
  CHECK(mid.tokens == std::vector<std::string>{"p", "q", "one", "two", "three", "four", "five"});
  CHECK(mid.sentence_offset == 4);
  const auto solo = probe_context(c, 3, {});
  CHECK(solo.tokens == std::vector<std::string>{"six", "seven"});
  CHECK(solo.sentence_offset == 0);
}

TEST_CASE("instance scores probe the whole span in context") {
  const auto c = corpus::read_treebank(paths::test_data("sample.trees"));
  const auto specs = corpus::read_phrase_list(paths::test_data("phrases.tsv"));
  const auto instances = treequery::extract_instances(c, specs.at(0));
  REQUIRE(instances.size() == 4);
  std::mt19937_64 rng(4);
  const auto base = vocabulary_of(c);
  // A random chain over the same vocabulary, so context matters.
  const auto shaped = oracle::random_model(rng, base.size());
  std::vector<std::vector<double>> rows;
  for (std::size_t a = 0; a < shaped.size(); ++a) {
    rows.emplace_back();
    for (std::size_t b = 0; b < shaped.size(); ++b) rows.back().push_back(shaped.transition(a, b));
  }
  std::vector<double> initial;
  for (std::size_t a = 0; a < shaped.size(); ++a) initial.push_back(shaped.initial(a));
  ToyProvider p(MarkovModel(base.vocabulary(), initial, rows), 1);
  const auto pad = padding_tokens(default_padding());

  bool saw_four = false;
  for (const auto& inst : instances) {
    const auto score = instance_contingency(p, c, inst, pad);
    CHECK(score.phrase_id == "spill_beans");
    CHECK(score.record == inst.record);
    CHECK(score.span_start == inst.span_start);
    CHECK(score.n_span_words() == inst.span_length());
    saw_four = saw_four || score.n_span_words() == 4;

    // Rebuild the probe by hand and score it directly.
    std::vector<std::string> tokens = pad;
    const auto& rec = c.at(inst.record);
    if (rec.prev_id) {
      for (const auto& t : c.at(*rec.prev_id).tokens) tokens.push_back(t.surface);
    }
    const std::size_t offset = tokens.size();
    for (const auto& t : rec.tokens) tokens.push_back(t.surface);
    if (rec.next_id) {
      for (const auto& t : c.at(*rec.next_id).tokens) tokens.push_back(t.surface);
    }
    const auto direct =
        span_contingency(p, tokens, offset + inst.span_start, offset + inst.span_end);
    CHECK(score.value == direct.value);
    CHECK(score.joint_logprob == direct.joint_logprob);
  }
  CHECK(saw_four);
}

}  // TEST_SUITE
