#ifndef IDIOMSPACE_TESTS_ORACLES_HPP
#define IDIOMSPACE_TESTS_ORACLES_HPP

// Reference computations written straight from the textbook formulas. None of
// them call into the library's numerical code; they only read model
// parameters and build inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "idiomspace/oracle_lm.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Markov chain by enumeration

/// P(sequence) as a plain product of parameters.
inline double sequence_prob(const idiomspace::oracle_lm::MarkovModel& m,
                            const std::vector<std::size_t>& ids) {
  double p = m.initial(ids[0]);
  for (std::size_t i = 1; i < ids.size(); ++i) p *= m.transition(ids[i - 1], ids[i]);
  return p;
}

/// Calls `visit` on every assignment of vocabulary ids to `free` positions of
/// `ids` (modified in place).
inline void for_each_completion(std::size_t vocab, std::vector<std::size_t>& ids,
                                const std::vector<std::size_t>& free,
                                const std::function<void()>& visit) {
  std::vector<std::size_t> digits(free.size(), 0);
  while (true) {
    for (std::size_t k = 0; k < free.size(); ++k) ids[free[k]] = digits[k];
    visit();
    std::size_t k = 0;
    while (k < digits.size() && ++digits[k] == vocab) digits[k++] = 0;
    if (k == digits.size()) return;
  }
}

inline std::vector<std::size_t> to_ids(const idiomspace::oracle_lm::MarkovModel& m,
                                       const std::vector<std::string>& tokens) {
  std::vector<std::size_t> ids;
  for (const auto& t : tokens) {
    const auto& v = m.vocabulary();
    ids.push_back(static_cast<std::size_t>(std::find(v.begin(), v.end(), t) - v.begin()));
  }
  return ids;
}

/// Random chain over words w0..w{v-1} with strictly positive parameters.
inline idiomspace::oracle_lm::MarkovModel random_model(std::mt19937_64& rng, std::size_t v) {
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
  std::vector<std::vector<double>> transitions;
  for (std::size_t i = 0; i < v; ++i) transitions.push_back(row());
  return {std::move(vocab), std::move(initial), std::move(transitions)};
}

/// log P(tokens[target] | unmasked others): masked positions and the target
/// are summed out in the denominator, masked positions only in the numerator.
inline double conditional(const idiomspace::oracle_lm::MarkovModel& m,
                          const std::vector<std::string>& tokens, const std::vector<bool>& mask,
                          std::size_t target) {
  auto ids = to_ids(m, tokens);
  const std::size_t want = ids[target];
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (mask[i] || i == target) free.push_back(i);
  }
  double num = 0.0, den = 0.0;
  for_each_completion(m.size(), ids, free, [&] {
    const double p = sequence_prob(m, ids);
    den += p;
    if (ids[target] == want) num += p;
  });
  return std::log(num / den);
}

/// Generalized PMI of tokens[s..e] with everything else visible: the log of
/// the span's joint probability over the product of its single-word
/// marginals, both conditioned on the context.
struct Pmi {
  double value;
  double joint;
  std::vector<double> marginals;
};

inline Pmi span_pmi(const idiomspace::oracle_lm::MarkovModel& m,
                    const std::vector<std::string>& tokens, std::size_t s, std::size_t e) {
  auto ids = to_ids(m, tokens);
  const auto observed = ids;
  std::vector<std::size_t> free;
  for (std::size_t i = s; i <= e; ++i) free.push_back(i);
  double total = 0.0, exact = 0.0;
  std::vector<double> agree(free.size(), 0.0);
  for_each_completion(m.size(), ids, free, [&] {
    const double p = sequence_prob(m, ids);
    total += p;
    bool all = true;
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (ids[free[k]] == observed[free[k]]) {
        agree[k] += p;
      } else {
        all = false;
      }
    }
    if (all) exact += p;
  });
  Pmi out;
  out.joint = std::log(exact / total);
  out.value = out.joint;
  for (double a : agree) {
    out.marginals.push_back(std::log(a / total));
    out.value -= out.marginals.back();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conventionality, transcribed term by term

inline double eq2(const std::vector<std::vector<double>>& targets, const std::vector<double>& mu,
                  const std::vector<double>& sigma) {
  double sum = 0.0;
  for (const auto& t : targets) {
    double sq = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const double z = (t[k] - mu[k]) / sigma[k];
      sq += z * z;
    }
    sum += std::sqrt(sq);
  }
  return -sum / static_cast<double>(targets.size());
}

// ---------------------------------------------------------------------------
// Statistics

/// Regularized incomplete beta by Lentz's continued fraction.
inline double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto cf = [](double a, double b, double x) {
    const double tiny = 1e-300;
    double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < 10000; ++m) {
      const double m2 = 2.0 * m;
      double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
      d = 1.0 + aa * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
  };
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * cf(a, b, x) / a;
  return 1.0 - front * cf(b, a, 1.0 - x) / b;
}

/// Two-sided Student-t tail probability.
inline double t_p(double t, double df) { return betai(df / 2.0, 0.5, df / (df + t * t)); }

struct T {
  double t, df, p;
};

inline double avg(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_var(const std::vector<double>& x) {
  const double m = avg(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline T welch(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double qa = sample_var(a) / na, qb = sample_var(b) / nb;
  const double t = (avg(a) - avg(b)) / std::sqrt(qa + qb);
  const double df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  return {t, df, t_p(t, df)};
}

inline T paired(const std::vector<double>& d) {
  const double n = static_cast<double>(d.size());
  const double t = avg(d) / std::sqrt(sample_var(d) / n);
  return {t, n - 1.0, t_p(t, n - 1.0)};
}

struct R {
  double r, p;
};

inline R pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double cov = sxy - sx * sy / n;
  const double r = cov / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
  const double t = r * std::sqrt((n - 2.0) / (1.0 - r * r));
  return {r, t_p(t, n - 2.0)};
}

struct Ols {
  double slope, intercept, se, t, p;
};

/// Normal equations [n Sx; Sx Sxx][a b]' = [Sy Sxy]' solved by Cramer's rule.
inline Ols ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  const double a = (sy * sxx - sx * sxy) / det;
  const double b = (n * sxy - sx * sy) / det;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - a - b * x[i];
    sse += e * e;
  }
  const double se = std::sqrt(sse / (n - 2.0) * n / det);
  const double t = b / se;
  return {b, a, se, t, t_p(t, n - 2.0)};
}

// ---------------------------------------------------------------------------
// Trees and queries for brute-force matching

struct TreeNode {
  std::string label;
  std::vector<std::size_t> children;
  int parent = -1;
  int token = -1;  // preterminals only
};

struct Tree {
  std::vector<TreeNode> nodes;  // preorder
  std::vector<std::string> lemmas;

  std::string bracketed(std::size_t id = 0) const {
    const auto& n = nodes[id];
    if (n.token >= 0) {
      const auto& w = lemmas[static_cast<std::size_t>(n.token)];
      return "(" + n.label + " " + w + "|" + w + "|" + n.label + ")";
    }
    std::string s = "(" + n.label;
    for (auto c : n.children) s += " " + bracketed(c);
    return s + ")";
  }

  bool ancestor(std::size_t a, std::size_t b) const {
    for (int p = nodes[b].parent; p >= 0; p = nodes[static_cast<std::size_t>(p)].parent) {
      if (static_cast<std::size_t>(p) == a) return true;
    }
    return false;
  }

  int sibling_position(std::size_t id) const {
    const int p = nodes[id].parent;
    if (p < 0) return -1;
    const auto& kids = nodes[static_cast<std::size_t>(p)].children;
    return static_cast<int>(std::find(kids.begin(), kids.end(), id) - kids.begin());
  }
};

/// Random tree with at most `max_nodes` nodes; every internal node has at
/// least one child and every leaf is a preterminal.
inline Tree random_tree(std::mt19937_64& rng, std::size_t max_nodes) {
  static const std::vector<std::string> phrasal = {"S", "NP", "VP", "PP"};
  static const std::vector<std::string> pre = {"NN", "NNS", "VB", "DT", "JJ"};
  static const std::vector<std::string> words = {"a", "b", "c"};
  Tree t;
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::function<std::size_t(int, std::size_t&)> grow = [&](int parent, std::size_t& budget) {
    const std::size_t id = t.nodes.size();
    t.nodes.push_back({});
    t.nodes[id].parent = parent;
    --budget;
    const bool internal = budget >= 2 && (parent < 0 || std::bernoulli_distribution(0.45)(rng));
    if (!internal) {
      t.nodes[id].label = pick(pre);
      t.nodes[id].token = static_cast<int>(t.lemmas.size());
      t.lemmas.push_back(pick(words));
      return id;
    }
    t.nodes[id].label = pick(phrasal);
    const std::size_t want = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    for (std::size_t k = 0; k < want && budget >= 1; ++k) {
      const std::size_t c = grow(static_cast<int>(id), budget);
      t.nodes[id].children.push_back(c);
    }
    return id;
  };
  std::size_t budget = std::uniform_int_distribution<std::size_t>(3, max_nodes)(rng);
  grow(-1, budget);
  return t;
}

enum class Rel { child, descendant, next_sister, later_sister };

struct QNode {
  enum class Kind { any, labels, regex } kind = Kind::any;
  std::vector<std::string> labels;
  std::string regex;
  std::vector<std::string> lemmas;
  std::string name;
  std::vector<std::pair<Rel, std::size_t>> edges;
};

struct Query {
  std::vector<QNode> nodes;  // node 0 is the root; edges point forward

  std::string text(std::size_t id = 0) const {
    static const char* sym[] = {"<", "<<", "$.", "$.."};
    const auto& n = nodes[id];
    std::string s;
    switch (n.kind) {
      case QNode::Kind::any: s = "__"; break;
      case QNode::Kind::labels:
        for (std::size_t i = 0; i < n.labels.size(); ++i) s += (i ? "|" : "") + n.labels[i];
        break;
      case QNode::Kind::regex: s = "/" + n.regex + "/"; break;
    }
    if (!n.lemmas.empty()) {
      s += "[lemma=";
      for (std::size_t i = 0; i < n.lemmas.size(); ++i) s += (i ? "|" : "") + n.lemmas[i];
      s += "]";
    }
    if (!n.name.empty()) s += "=" + n.name;
    for (const auto& [rel, target] : n.edges) {
      const std::string child = text(target);
      s += std::string(" ") + sym[static_cast<int>(rel)] + " " +
           (nodes[target].edges.empty() ? child : "(" + child + ")");
    }
    return s;
  }
};

inline Query random_query(std::mt19937_64& rng) {
  static const std::vector<std::string> labels = {"S", "NP", "VP", "PP", "NN", "NNS", "VB", "DT", "JJ"};
  static const std::vector<std::string> regexes = {"^N", "P$", "^V", "S", "^[DJ]"};
  static const std::vector<std::string> words = {"a", "b", "c"};
  auto uni = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  Query q;
  const std::size_t n = uni(2, 4);
  q.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = q.nodes[i];
    switch (uni(0, 2)) {
      case 0: node.kind = QNode::Kind::any; break;
      case 1: {
        node.kind = QNode::Kind::labels;
        const std::size_t k = uni(1, 2);
        while (node.labels.size() < k) {
          const auto& l = labels[uni(0, labels.size() - 1)];
          if (std::find(node.labels.begin(), node.labels.end(), l) == node.labels.end()) {
            node.labels.push_back(l);
          }
        }
        break;
      }
      default: node.kind = QNode::Kind::regex; node.regex = regexes[uni(0, regexes.size() - 1)];
    }
    if (uni(0, 3) == 0) {
      node.lemmas.push_back(words[uni(0, 2)]);
      if (uni(0, 1)) {
        const auto& extra = words[uni(0, 2)];
        if (extra != node.lemmas[0]) node.lemmas.push_back(extra);
      }
    }
    if (i > 0) {
      const std::size_t owner = uni(0, i - 1);
      q.nodes[owner].edges.push_back({static_cast<Rel>(uni(0, 3)), i});
    }
  }
  // head and dep on two distinct nodes, optionally one more capture.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  q.nodes[order[0]].name = "head";
  q.nodes[order[1]].name = "dep";
  if (n > 2 && uni(0, 1)) q.nodes[order[2]].name = "x";
  return q;
}

inline bool node_matches(const Tree& t, const QNode& q, std::size_t id) {
  const auto& label = t.nodes[id].label;
  switch (q.kind) {
    case QNode::Kind::any: break;
    case QNode::Kind::labels:
      if (std::find(q.labels.begin(), q.labels.end(), label) == q.labels.end()) return false;
      break;
    case QNode::Kind::regex:
      if (!std::regex_search(label, std::regex(q.regex))) return false;
      break;
  }
  if (!q.lemmas.empty()) {
    const int tok = t.nodes[id].token;
    if (tok < 0) return false;
    const auto& lemma = t.lemmas[static_cast<std::size_t>(tok)];
    if (std::find(q.lemmas.begin(), q.lemmas.end(), lemma) == q.lemmas.end()) return false;
  }
  return true;
}

inline bool relation_holds(const Tree& t, Rel rel, std::size_t a, std::size_t b) {
  switch (rel) {
    case Rel::child: return t.nodes[b].parent == static_cast<int>(a);
    case Rel::descendant: return t.ancestor(a, b);
    case Rel::next_sister:
    case Rel::later_sister: {
      if (t.nodes[a].parent < 0 || t.nodes[a].parent != t.nodes[b].parent) return false;
      const int ia = t.sibling_position(a), ib = t.sibling_position(b);
      return rel == Rel::next_sister ? ib == ia + 1 : ib > ia;
    }
  }
  return false;
}

/// Every assignment of tree nodes to all query nodes, tested exhaustively,
/// projected onto the named captures.
inline std::set<std::map<std::string, std::size_t>> brute_force(const Query& q, const Tree& t) {
  std::set<std::map<std::string, std::size_t>> out;
  std::vector<std::size_t> assign(q.nodes.size(), 0);
  const std::size_t size = t.nodes.size();
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < q.nodes.size() && ok; ++i) {
      ok = node_matches(t, q.nodes[i], assign[i]);
      for (const auto& [rel, target] : q.nodes[i].edges) {
        ok = ok && relation_holds(t, rel, assign[i], assign[target]);
      }
    }
    if (ok) {
      std::map<std::string, std::size_t> b;
      for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        if (!q.nodes[i].name.empty()) b[q.nodes[i].name] = assign[i];
      }
      out.insert(b);
    }
    std::size_t k = 0;
    while (k < assign.size() && ++assign[k] == size) assign[k++] = 0;
    if (k == assign.size()) break;
  }
  return out;
}

}  // namespace oracle

#endif  // IDIOMSPACE_TESTS_ORACLES_HPP
