#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "idiomspace/corpus.hpp"
#include "idiomspace/errors.hpp"
#include "idiomspace/extraction.hpp"
#include "idiomspace/treequery.hpp"
#include "oracles.hpp"
#include "paths.hpp"

using namespace idiomspace;
using namespace idiomspace::treequery;

namespace {

corpus::SentenceRecord record(const std::string& text) {
  corpus::SentenceRecord r;
  std::tie(r.tokens, r.tree) = corpus::parse_bracketed(text);
  return r;
}

std::string word(const corpus::SentenceRecord& r, corpus::NodeId id) {
  return r.tokens.at(*r.tree.node(id).leaf_token).surface;
}

std::set<std::map<std::string, std::size_t>> as_set(const std::vector<MatchBinding>& bs) {
  std::set<std::map<std::string, std::size_t>> out;
  for (const auto& b : bs) out.insert({b.nodes.begin(), b.nodes.end()});
  return out;
}

}  // namespace

TEST_SUITE("treequery") {

TEST_CASE("compile accepts the documented forms") {
  const auto q = compile_query("VP < (VB=head $.. (NP < NN=dep))");
  CHECK(q.nodes().size() == 4);
  CHECK(q.names() == std::vector<std::string>{"head", "dep"});
  CHECK(q.nodes()[q.node_of("head")].predicate.labels == std::vector<std::string>{"VB"});
  CHECK_NOTHROW(compile_query("__ < (/^NN/[lemma=bean|beans]=dep $. __=head)"));
  CHECK_NOTHROW(compile_query("NP|NX << JJ=dep << NN=head"));
}

TEST_CASE("compile rejects bad input") {
  CHECK_THROWS_AS(compile_query("NP < (JJ=head)"), ValidationError);
  CHECK_THROWS_AS(compile_query("NP < JJ=head < NN=head"), ValidationError);
  SUBCASE("syntax errors carry a position") {
    try {
      compile_query("NP < (JJ=head $. NN=dep");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.column() > 0);
    }
    CHECK_THROWS_AS(compile_query("NP <"), ParseError);
    CHECK_THROWS_AS(compile_query("NP ~ NN=head"), ParseError);
    CHECK_THROWS_AS(compile_query("/[/=head < NN=dep"), ParseError);
  }
}

TEST_CASE("default queries compile and pretty-printing is idempotent") {
  for (auto type : {corpus::PhraseType::VO, corpus::PhraseType::AN, corpus::PhraseType::NN,
                    corpus::PhraseType::B}) {
    CAPTURE(corpus::to_string(type));
    const auto q = compile_query(corpus::default_query(type));
    const auto again = compile_query(q.pretty());
    CHECK(again.pretty() == q.pretty());
    CHECK(again.nodes().size() == q.nodes().size());
  }
}

TEST_CASE("VO query finds spilled ... beans") {
  const auto q = compile_query(corpus::default_query(corpus::PhraseType::VO));
  const auto r = record("(S (NP (NNS dogs)) (VP (VBD spilled) (NP (DT the) (NNS beans))))");
  const auto bs = match_all(q, r);
  REQUIRE(bs.size() == 1);
  CHECK(word(r, bs[0].at("head")) == "spilled");
  CHECK(word(r, bs[0].at("dep")) == "beans");
  CHECK(bs[0].span_start == 1);
  CHECK(bs[0].span_end == 3);
}

TEST_CASE("VO query on a verbless sentence is empty") {
  const auto q = compile_query(corpus::default_query(corpus::PhraseType::VO));
  CHECK(match_all(q, record("(NP (DT the) (JJ red) (NN tape))")).empty());
}

TEST_CASE("relations") {
  const auto r = record("(S (NP (DT a) (JJ b) (NN c)) (VP (VB d)))");
  // Preorder ids: 0 S, 1 NP, 2 DT, 3 JJ, 4 NN, 5 VP, 6 VB.
  CHECK(holds(r.tree, Relation::immediately_dominates, 1, 2));
  CHECK_FALSE(holds(r.tree, Relation::immediately_dominates, 0, 2));
  CHECK(holds(r.tree, Relation::dominates, 0, 6));
  CHECK_FALSE(holds(r.tree, Relation::dominates, 2, 2));
  CHECK(holds(r.tree, Relation::immediately_precedes_sibling, 2, 3));
  CHECK_FALSE(holds(r.tree, Relation::immediately_precedes_sibling, 2, 4));
  CHECK(holds(r.tree, Relation::precedes_sibling, 2, 4));
  CHECK_FALSE(holds(r.tree, Relation::precedes_sibling, 4, 2));
  CHECK_FALSE(holds(r.tree, Relation::precedes_sibling, 4, 6));
}

TEST_CASE("matches are ordered by head then dep") {
  const auto q = compile_query("NP < (__=head $.. __=dep)");
  const auto r = record("(NP (DT a) (JJ b) (NN c))");
  const auto bs = match_all(q, r);
  REQUIRE(bs.size() == 3);
  for (std::size_t i = 1; i < bs.size(); ++i) {
    const auto prev = std::pair(bs[i - 1].at("head"), bs[i - 1].at("dep"));
    const auto cur = std::pair(bs[i].at("head"), bs[i].at("dep"));
    CHECK(prev < cur);
  }
}

TEST_CASE("match_all equals brute-force assignment search on random trees") {
  std::mt19937_64 rng(7);
  std::size_t compared = 0, mismatches = 0;
  for (int tree_no = 0; tree_no < 120; ++tree_no) {
    const auto tree = oracle::random_tree(rng, 12);
    const auto rec = record(tree.bracketed());
    REQUIRE(rec.tree.size() == tree.nodes.size());
    for (int q_no = 0; q_no < 10; ++q_no) {
      const auto q = oracle::random_query(rng);
      const auto got = as_set(match_all(compile_query(q.text()), rec));
      if (got != oracle::brute_force(q, tree)) ++mismatches;
      ++compared;
    }
  }
  CHECK(compared == 1200);
  CHECK(mismatches == 0);
}

TEST_CASE("adding a sentence never removes an instance") {
  const auto base = corpus::read_treebank(paths::test_data("sample.trees"));
  std::vector<corpus::SentenceRecord> more = base.records();
  auto extra = record("(S (NP (PRP you)) (VP (VB spill) (NP (DT the) (NNS beans|bean|NNS))))");
  extra.doc_id = "extra";
  more.push_back(extra);
  const corpus::Corpus bigger(more);
  corpus::PhraseSpec spec{"spill_beans", corpus::PhraseType::VO, "spill", "bean",
                          corpus::default_query(corpus::PhraseType::VO), true};
  const auto before = extract_instances(base, spec);
  const auto after = extract_instances(bigger, spec);
  CHECK(after.size() == before.size() + 1);
  for (const auto& inst : before) {
    CHECK(std::find(after.begin(), after.end(), inst) != after.end());
  }
}

}  // TEST_SUITE

TEST_SUITE("extraction") {

namespace {

corpus::PhraseSpec spec_of(const std::string& id, corpus::PhraseType type, const std::string& head,
                           const std::string& dep) {
  return {id, type, head, dep, corpus::default_query(type), true};
}

}  // namespace

TEST_CASE("four uses of spill the beans in the sample corpus") {
  const auto c = corpus::read_treebank(paths::test_data("sample.trees"));
  const auto spec = spec_of("spill_beans", corpus::PhraseType::VO, "spill", "bean");
  const auto target = extract_instances(c, spec);
  CHECK(target.size() == 4);
  for (const auto& inst : target) CHECK(inst.match_class == corpus::MatchClass::target);
}

TEST_CASE("an intervening adjective stays inside the span") {
  const auto c = corpus::read_treebank(paths::test_data("sample.trees"));
  const auto target = extract_instances(c, spec_of("spill_beans", corpus::PhraseType::VO, "spill", "bean"));
  const auto it = std::find_if(target.begin(), target.end(), [&](const auto& i) {
    return c.at(i.record).tokens.at(i.span_start + 2).surface == "exciting";
  });
  REQUIRE(it != target.end());
  CHECK(it->span_length() == 4);
  CHECK(c.at(it->record).tokens.at(it->span_start).lemma == "spill");
  CHECK(c.at(it->record).tokens.at(it->span_end).lemma == "bean");
}

TEST_CASE("corpus without the phrase") {
  const auto c = corpus::read_treebank(paths::test_data("sample.trees"));
  CHECK(extract_instances(c, spec_of("kick_bucket", corpus::PhraseType::VO, "kick", "bucket")).empty());
}

TEST_CASE("sour grape: a special grape is dep-fixed, the target never is") {
  const auto c = corpus::read_treebank(paths::test_data("sample.trees"));
  const auto spec = spec_of("sour_grape", corpus::PhraseType::AN, "grape", "sour");
  const auto head_fixed = extract_matched(c, spec, corpus::Slot::head);
  REQUIRE(head_fixed.size() == 1);
  CHECK(c.at(head_fixed[0].record).tokens.at(head_fixed[0].dep_index).lemma == "special");
  CHECK(head_fixed[0].match_class == corpus::MatchClass::head_matched);
  const auto dep_fixed = extract_matched(c, spec, corpus::Slot::dep);
  REQUIRE(dep_fixed.size() == 1);
  CHECK(c.at(dep_fixed[0].record).tokens.at(dep_fixed[0].head_index).lemma == "milk");
  for (const auto* set : {&head_fixed, &dep_fixed}) {
    for (const auto& inst : *set) {
      const auto& toks = c.at(inst.record).tokens;
      CHECK_FALSE((toks[inst.head_index].lemma == "grape" && toks[inst.dep_index].lemma == "sour"));
    }
  }
}

TEST_CASE("fixed word only inside the target gives no matched instances") {
  const auto c = corpus::read_treebank(paths::test_data("sample.trees"));
  const auto spec = spec_of("wear_and_tear", corpus::PhraseType::B, "wear", "tear");
  CHECK(extract_instances(c, spec).size() == 1);
  CHECK(extract_matched(c, spec, corpus::Slot::head).empty());
  CHECK(extract_matched(c, spec, corpus::Slot::dep).empty());
}

TEST_CASE("binomial head is the first conjunct") {
  const auto c = corpus::read_treebank(paths::test_data("sample.trees"));
  const auto inst = extract_instances(c, spec_of("wear_and_tear", corpus::PhraseType::B, "wear", "tear"));
  REQUIRE(inst.size() == 1);
  CHECK(c.at(inst[0].record).tokens.at(inst[0].head_index).surface == "wear");
  CHECK(inst[0].span_length() == 3);
}

TEST_CASE("classes are disjoint and counts match a linear scan on the bundled corpus") {
  const auto c = corpus::read_treebank(paths::data("minicorpus.trees"));
  const auto specs = corpus::read_phrase_list(paths::data("phrases.tsv"));
  for (const auto& spec : specs) {
    CAPTURE(spec.phrase_id);
    const PhrasePattern pattern(spec);
    const auto sets = extract_all(c, pattern);
    // Scan: every structural match sorted by which slots carry the lemmas.
    std::size_t target = 0, head = 0, dep = 0;
    for (std::size_t r = 0; r < c.size(); ++r) {
      for (const auto& m : pattern.structural_matches(c, r)) {
        const auto& toks = c.at(r).tokens;
        const bool h = toks[m.head_index].lemma == spec.head_lemma;
        const bool d = toks[m.dep_index].lemma == spec.dep_lemma;
        target += h && d;
        head += h && !d;
        dep += !h && d;
      }
    }
    CHECK(sets.target.size() == target);
    CHECK(sets.head_matched.size() == head);
    CHECK(sets.dep_matched.size() == dep);
    CHECK(sets.target == extract_instances(c, pattern));
    CHECK(sets.head_matched == extract_matched(c, pattern, corpus::Slot::head));
    CHECK(sets.dep_matched == extract_matched(c, pattern, corpus::Slot::dep));
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (const auto* set : {&sets.target, &sets.head_matched, &sets.dep_matched}) {
      for (const auto& i : *set) CHECK(seen.insert({i.record, i.head_index, i.dep_index}).second);
    }
  }
}

TEST_CASE("synthetic corpus: every phrase clears the instance filter") {
  const auto c = corpus::read_treebank(paths::data("minicorpus.trees"));
  for (const auto& spec : corpus::read_phrase_list(paths::data("phrases.tsv"))) {
    CAPTURE(spec.phrase_id);
    const auto sets = extract_all(c, PhrasePattern(spec));
    CHECK(sets.target.size() >= 30);
    CHECK(sets.head_matched.size() + sets.dep_matched.size() >= 30);
  }
}

}  // TEST_SUITE
