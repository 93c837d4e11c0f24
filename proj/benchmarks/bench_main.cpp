#include <benchmark/benchmark.h>

#include <random>

#include "idiomspace/contingency.hpp"
#include "idiomspace/conventionality.hpp"
#include "idiomspace/corpus.hpp"
#include "idiomspace/oracle_lm.hpp"
#include "idiomspace/providers.hpp"
#include "idiomspace/treequery.hpp"

using namespace idiomspace;
using oracle_lm::MarkovModel;
using oracle_lm::ToyProvider;

namespace {

const corpus::Corpus& minicorpus() {
  static const auto c = corpus::read_treebank(std::string(IDIOMSPACE_DATA_DIR) + "/minicorpus.trees");
  return c;
}

MarkovModel random_model(std::size_t v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto row = [&] {
    std::vector<double> r(v);
    double total = 0.0;
    for (double& x : r) total += x = u(rng);
    for (double& x : r) x /= total;
    return r;
  };
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < v; ++i) vocab.push_back("w" + std::to_string(i));
  auto initial = row();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < v; ++i) rows.push_back(row());
  return {std::move(vocab), std::move(initial), std::move(rows)};
}

void BM_MatchAll(benchmark::State& state) {
  const auto& c = minicorpus();
  const auto q = treequery::compile_query(corpus::default_query(corpus::PhraseType::VO));
  std::size_t found = 0;
  for (auto _ : state) {
    for (const auto& r : c.records()) found += treequery::match_all(q, r).size();
  }
  benchmark::DoNotOptimize(found);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.size()));
}
BENCHMARK(BM_MatchAll)->Unit(benchmark::kMillisecond);

/// One masked conditional with `range(0)` hidden words before the target.
void condprob(benchmark::State& state, ToyProvider::Route route) {
  const std::size_t hidden = static_cast<std::size_t>(state.range(0));
  ToyProvider p(random_model(8, 1), 1, route);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < 12; ++i) tokens.push_back("w" + std::to_string(i % 8));
  std::vector<bool> mask(tokens.size(), false);
  const std::size_t target = 8;
  for (std::size_t k = 1; k <= hidden; ++k) mask[target - k] = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(providers::request_condprob(p, tokens, mask, target));
  }
}

void BM_CondprobChain(benchmark::State& state) { condprob(state, ToyProvider::Route::forward_backward); }
void BM_CondprobEnumeration(benchmark::State& state) { condprob(state, ToyProvider::Route::enumeration); }
BENCHMARK(BM_CondprobChain)->DenseRange(0, 3);
BENCHMARK(BM_CondprobEnumeration)->DenseRange(0, 3);

void BM_SpanContingency(benchmark::State& state) {
  ToyProvider p(random_model(8, 2), 1);
  const auto padding = contingency::padding_tokens(contingency::default_padding());
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < padding.size() + 40; ++i) tokens.push_back("w" + std::to_string(i * 7 % 8));
  const std::size_t s = padding.size() + 20;
  const std::size_t e = s + static_cast<std::size_t>(state.range(0)) - 1;
  for (auto _ : state) benchmark::DoNotOptimize(contingency::span_contingency(p, tokens, s, e));
}
BENCHMARK(BM_SpanContingency)->DenseRange(2, 4);

void BM_ConvScore(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  auto draw = [&](std::size_t n) {
    std::vector<conventionality::Vector> out(n, conventionality::Vector(d));
    for (auto& v : out) {
      for (double& x : v) x = g(rng);
    }
    return out;
  };
  const auto occ = draw(200);
  const auto targets = draw(40);
  for (auto _ : state) {
    const auto mu = conventionality::mean_embedding(occ);
    const auto sigma = conventionality::componentwise_std(occ, mu);
    benchmark::DoNotOptimize(conventionality::conv_score(targets, mu, sigma));
  }
}
BENCHMARK(BM_ConvScore)->Arg(64)->Arg(220)->Arg(768);

}  // namespace

BENCHMARK_MAIN();
