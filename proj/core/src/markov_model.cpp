#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include "idiomspace/errors.hpp"
#include "idiomspace/oracle_lm.hpp"

namespace idiomspace::oracle_lm {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_distribution(const std::vector<double>& p, const std::string& what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError(what + " has a negative or non-finite entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << " sums to " << sum << ", not 1";
    throw ValidationError(os.str());
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

MarkovModel::MarkovModel(std::vector<std::string> vocabulary, std::vector<double> initial,
                         std::vector<std::vector<double>> transitions)
    : vocabulary_(std::move(vocabulary)), initial_(std::move(initial)) {
  const std::size_t v = vocabulary_.size();
  if (v == 0) throw ValidationError("Markov model has an empty vocabulary");
  for (std::size_t i = 0; i < v; ++i) {
    const auto& w = vocabulary_[i];
    if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos) {
      throw ValidationError("vocabulary word '" + w + "' is empty or contains whitespace");
    }
    if (!index_.emplace(w, i).second) throw ValidationError("duplicate vocabulary word '" + w + "'");
    if (w == kUnknownWord) unk_ = i;
  }
  if (initial_.size() != v) throw ValidationError("initial distribution has the wrong length");
  check_distribution(initial_, "initial distribution");
  if (transitions.size() != v) throw ValidationError("transition matrix has the wrong row count");
  transitions_.reserve(v * v);
  for (std::size_t i = 0; i < v; ++i) {
    if (transitions[i].size() != v) throw ValidationError("transition row '" + vocabulary_[i] + "' has the wrong length");
    check_distribution(transitions[i], "transition row '" + vocabulary_[i] + "'");
    transitions_.insert(transitions_.end(), transitions[i].begin(), transitions[i].end());
  }
}

MarkovModel MarkovModel::uniform(std::vector<std::string> vocabulary) {
  const std::size_t v = vocabulary.size();
  if (v == 0) throw ValidationError("Markov model has an empty vocabulary");
  std::vector<double> row(v, 1.0 / static_cast<double>(v));
  return MarkovModel(std::move(vocabulary), row, std::vector<std::vector<double>>(v, row));
}

std::optional<std::size_t> MarkovModel::lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  return unk_;
}

std::size_t MarkovModel::id(std::string_view word) const {
  auto w = lookup(word);
  if (!w) throw ValidationError("word '" + std::string(word) + "' is not in the model vocabulary");
  return *w;
}

std::string MarkovModel::serialize() const {
  std::string out = "# idiomspace first-order Markov model\n";
  out += "vocabulary " + std::to_string(size()) + "\n";
  for (const auto& w : vocabulary_) out += w + "\n";
  out += "initial";
  for (double p : initial_) out += " " + fmt17(p);
  out += "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out += "transition " + vocabulary_[i];
    for (std::size_t j = 0; j < size(); ++j) out += " " + fmt17(transition(i, j));
    out += "\n";
  }
  return out;
}

MarkovModel MarkovModel::parse(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::optional<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      return line;
    }
    return std::nullopt;
  };
  auto expect = [&](const char* what) {
    auto l = next();
    if (!l) throw ParseError(std::string("model file ends before ") + what, lineno);
    return *l;
  };

  std::istringstream head(expect("the vocabulary header"));
  std::string key;
  std::size_t v = 0;
  if (!(head >> key >> v) || key != "vocabulary" || v == 0) {
    throw ParseError("expected 'vocabulary <size>'", lineno);
  }
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < v; ++i) vocab.push_back(expect("the end of the vocabulary"));

  auto read_row = [&](const std::string& text, const std::string& tag,
                      std::string* word) -> std::vector<double> {
    std::istringstream is(text);
    std::string k;
    is >> k;
    if (k != tag) throw ParseError("expected '" + tag + "'", lineno);
    if (word && !(is >> *word)) throw ParseError("transition row lacks its word", lineno);
    std::vector<double> row;
    std::string num;
    while (is >> num) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(num, &used));
        if (used != num.size()) throw std::invalid_argument(num);
      } catch (const std::exception&) {
        throw ParseError("bad probability '" + num + "'", lineno);
      }
    }
    if (row.size() != v) throw ParseError(tag + " row has " + std::to_string(row.size()) +
                                          " entries, expected " + std::to_string(v), lineno);
    return row;
  };

  auto initial = read_row(expect("the initial distribution"), "initial", nullptr);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < v; ++i) {
    std::string word;
    rows.push_back(read_row(expect("a transition row"), "transition", &word));
    if (word != vocab[i]) throw ParseError("transition row for '" + word + "' out of order, expected '" + vocab[i] + "'", lineno);
  }
  if (next()) throw ParseError("trailing content after the transition matrix", lineno);
  return MarkovModel(std::move(vocab), std::move(initial), std::move(rows));
}

MarkovModel MarkovModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Markov model " + path.string());
  return parse(in);
}

namespace {

double joint_ids(const MarkovModel& model, const std::vector<std::size_t>& ids) {
  double lp = std::log(model.initial(ids[0]));
  for (std::size_t i = 1; i < ids.size(); ++i) lp += std::log(model.transition(ids[i - 1], ids[i]));
  return lp;
}

}  // namespace

double exact_joint(const MarkovModel& model, std::span<const std::string> tokens) {
  if (tokens.empty()) throw ContractError("exact_joint of an empty sequence");
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(model.id(t));
  return joint_ids(model, ids);
}

double exact_conditional(const MarkovModel& model, std::span<const std::string> tokens,
                         const std::vector<bool>& mask, std::size_t target_index,
                         std::size_t ceiling) {
  if (tokens.empty() || mask.size() != tokens.size() || target_index >= tokens.size()) {
    throw ContractError("exact_conditional: inconsistent tokens/mask/target");
  }
  const std::size_t v = model.size();
  std::vector<std::size_t> free_positions;
  std::vector<std::size_t> seq(tokens.size(), 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == target_index || mask[i]) {
      free_positions.push_back(i);
    } else {
      seq[i] = model.id(tokens[i]);
    }
  }
  const std::size_t target_word = model.id(tokens[target_index]);

  double completions = 1.0;
  for (std::size_t k = 0; k < free_positions.size(); ++k) {
    completions *= static_cast<double>(v);
    if (completions > static_cast<double>(ceiling)) {
      throw EnumerationLimitError("enumerating " + std::to_string(free_positions.size()) +
                                  " free positions over " + std::to_string(v) +
                                  " words exceeds the ceiling of " + std::to_string(ceiling));
    }
  }

  const double neg_inf = -std::numeric_limits<double>::infinity();
  double total = neg_inf;
  double with_target = neg_inf;
  std::vector<std::size_t> digits(free_positions.size(), 0);
  for (;;) {
    for (std::size_t k = 0; k < free_positions.size(); ++k) seq[free_positions[k]] = digits[k];
    const double lp = joint_ids(model, seq);
    total = log_sum_exp(total, lp);
    if (seq[target_index] == target_word) with_target = log_sum_exp(with_target, lp);

    std::size_t k = 0;
    while (k < digits.size() && ++digits[k] == v) digits[k++] = 0;
    if (k == digits.size()) break;
  }
  if (total == neg_inf) throw ContractError("visible context has zero probability under the model");
  return with_target - total;
}

double chain_conditional(const MarkovModel& model, std::span<const std::string> tokens,
                         const std::vector<bool>& mask, std::size_t target_index) {
  const std::size_t n = tokens.size();
  if (n == 0 || mask.size() != n || target_index >= n) {
    throw ContractError("chain_conditional: inconsistent tokens/mask/target");
  }
  const std::size_t v = model.size();
  // clamp[t] = the only admissible word at t, or nullopt when free.
  std::vector<std::optional<std::size_t>> clamp(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (t != target_index && !mask[t]) clamp[t] = model.id(tokens[t]);
  }
  const std::size_t target_word = model.id(tokens[target_index]);

  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e;
    if (!(s > 0.0)) throw ContractError("visible context has zero probability under the model");
    for (double& e : x) e /= s;
  };

  // Forward pass up to the target.
  std::vector<double> alpha(v, 0.0);
  std::vector<double> next(v, 0.0);
  for (std::size_t w = 0; w < v; ++w) {
    if (!clamp[0] || *clamp[0] == w) alpha[w] = model.initial(w);
  }
  normalize(alpha);
  for (std::size_t t = 1; t <= target_index; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t u = 0; u < v; ++u) {
      if (alpha[u] == 0.0) continue;
      if (clamp[t]) {
        next[*clamp[t]] += alpha[u] * model.transition(u, *clamp[t]);
      } else {
        for (std::size_t w = 0; w < v; ++w) next[w] += alpha[u] * model.transition(u, w);
      }
    }
    alpha.swap(next);
    normalize(alpha);
  }

  // Backward pass down to the target.
  std::vector<double> beta(v, 1.0);
  for (std::size_t t = n - 1; t > target_index; --t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t u = 0; u < v; ++u) {
      if (clamp[t]) {
        next[u] = model.transition(u, *clamp[t]) * beta[*clamp[t]];
      } else {
        double s = 0.0;
        for (std::size_t w = 0; w < v; ++w) s += model.transition(u, w) * beta[w];
        next[u] = s;
      }
    }
    beta.swap(next);
    normalize(beta);
  }

  double z = 0.0;
  for (std::size_t w = 0; w < v; ++w) z += alpha[w] * beta[w];
  const double num = alpha[target_word] * beta[target_word];
  if (!(z > 0.0)) throw ContractError("visible context has zero probability under the model");
  return std::log(num) - std::log(z);
}

MarkovModel estimate(const corpus::Corpus& corpus, const EstimateOptions& options) {
  if (options.max_vocabulary < 2) throw ConfigError("max_vocabulary must be at least 2");
  if (!(options.smoothing > 0.0)) throw ConfigError("smoothing must be positive");
  std::map<std::string, std::size_t> counts;
  for (const auto& rec : corpus.records()) {
    for (const auto& t : rec.tokens) ++counts[t.surface];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> vocab;
  for (const auto& [w, c] : ranked) {
    if (c < options.min_count || vocab.size() + 1 >= options.max_vocabulary) break;
    if (w == kUnknownWord) continue;
    vocab.push_back(w);
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.push_back(kUnknownWord);
  const std::size_t v = vocab.size();

  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < v; ++i) idx[vocab[i]] = i;
  auto id_of = [&](const std::string& w) {
    auto it = idx.find(w);
    return it == idx.end() ? v - 1 : it->second;
  };

  std::vector<double> unigram(v, 0.0);
  std::vector<std::vector<double>> bigram(v, std::vector<double>(v, 0.0));
  std::optional<std::size_t> prev;
  std::string doc;
  for (const auto& rec : corpus.records()) {
    if (rec.doc_id != doc) {
      doc = rec.doc_id;
      prev.reset();
    }
    for (const auto& t : rec.tokens) {
      const std::size_t cur = id_of(t.surface);
      unigram[cur] += 1.0;
      if (prev) bigram[*prev][cur] += 1.0;
      prev = cur;
    }
  }
  auto smooth = [&](std::vector<double>& row) {
    double total = 0.0;
    for (double& x : row) {
      x += options.smoothing;
      total += x;
    }
    for (double& x : row) x /= total;
    // Push the residual rounding error into the largest entry.
    double s = 0.0;
    for (double x : row) s += x;
    *std::max_element(row.begin(), row.end()) += 1.0 - s;
  };
  smooth(unigram);
  for (auto& row : bigram) smooth(row);
  return MarkovModel(std::move(vocab), std::move(unigram), std::move(bigram));
}

}  // namespace idiomspace::oracle_lm
