#include <algorithm>
#include <cctype>
#include <set>

#include "idiomspace/errors.hpp"
#include "idiomspace/treequery.hpp"

namespace idiomspace::treequery {

const char* symbol(Relation rel) {
  switch (rel) {
    case Relation::immediately_dominates: return "<";
    case Relation::dominates: return "<<";
    case Relation::immediately_precedes_sibling: return "$.";
    case Relation::precedes_sibling: return "$..";
  }
  return "?";
}

bool NodePredicate::matches(const corpus::ParseTree& tree,
                            const std::vector<corpus::Token>& tokens,
                            corpus::NodeId node) const {
  const auto& n = tree.node(node);
  switch (kind) {
    case Kind::any: break;
    case Kind::labels:
      if (std::find(labels.begin(), labels.end(), n.label) == labels.end()) return false;
      break;
    case Kind::regex:
      if (!std::regex_search(n.label, *regex)) return false;
      break;
  }
  if (!lemmas.empty()) {
    if (!n.leaf_token) return false;
    const std::string& lemma = tokens.at(*n.leaf_token).lemma;
    if (std::find(lemmas.begin(), lemmas.end(), lemma) == lemmas.end()) return false;
  }
  return true;
}

namespace {

bool is_label_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' ||
         c == '*' || c == ',' || c == ':' || c == ';' || c == '\'' || c == '`' || c == '#' ||
         c == '&' || c == '.';
}

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class QueryParser {
 public:
  explicit QueryParser(std::string_view src) : src_(src) {}

  std::vector<QueryNode> parse() {
    skip();
    if (at_end()) fail("empty query");
    parse_expr();
    skip();
    if (!at_end()) fail("unexpected '" + std::string(1, peek()) + "'");
    return std::move(nodes_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("query syntax error: " + what, 0, pos_ + 1);
  }
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }
  void skip() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool consume(std::string_view token) {
    if (src_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  // expr := '(' expr ')' | simple relation*
  std::size_t parse_expr() {
    skip();
    if (consume("(")) {
      const std::size_t id = parse_expr();
      skip();
      if (!consume(")")) fail("expected ')'");
      // Relations may follow a parenthesized group and attach to its head.
      parse_relations(id);
      return id;
    }
    const std::size_t id = parse_simple();
    parse_relations(id);
    return id;
  }

  void parse_relations(std::size_t id) {
    for (;;) {
      skip();
      Relation rel;
      if (consume("<<")) {
        rel = Relation::dominates;
      } else if (consume("<")) {
        rel = Relation::immediately_dominates;
      } else if (consume("$..")) {
        rel = Relation::precedes_sibling;
      } else if (consume("$.")) {
        rel = Relation::immediately_precedes_sibling;
      } else {
        return;
      }
      skip();
      std::size_t target;
      if (consume("(")) {
        target = parse_expr();
        skip();
        if (!consume(")")) fail("expected ')'");
      } else {
        if (at_end()) fail("relation without a target node");
        target = parse_simple();
      }
      nodes_[id].edges.push_back({rel, target});
    }
  }

  // simple := pred lemma? ('=' name)?
  std::size_t parse_simple() {
    skip();
    QueryNode node;
    if (consume("__")) {
      node.predicate.kind = NodePredicate::Kind::any;
    } else if (peek() == '/') {
      ++pos_;
      std::string re;
      while (!at_end() && peek() != '/') {
        if (peek() == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
          re += '/';
          pos_ += 2;
          continue;
        }
        re += src_[pos_++];
      }
      if (!consume("/")) fail("unterminated regex");
      if (re.empty()) fail("empty regex");
      node.predicate.kind = NodePredicate::Kind::regex;
      node.predicate.regex_source = re;
      try {
        node.predicate.regex = std::make_shared<const std::regex>(re, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        fail("bad regex /" + re + "/: " + e.what());
      }
    } else {
      node.predicate.kind = NodePredicate::Kind::labels;
      node.predicate.labels.push_back(read_label());
      while (consume("|")) node.predicate.labels.push_back(read_label());
    }
    if (consume("[")) {
      skip();
      if (!consume("lemma")) fail("expected 'lemma' in node filter");
      skip();
      if (!consume("=")) fail("expected '=' in lemma filter");
      do {
        skip();
        std::string word;
        while (!at_end() && peek() != '|' && peek() != ']' &&
               !std::isspace(static_cast<unsigned char>(peek()))) {
          word += src_[pos_++];
        }
        if (word.empty()) fail("empty lemma");
        node.predicate.lemmas.push_back(word);
        skip();
      } while (consume("|"));
      if (!consume("]")) fail("expected ']'");
    }
    if (consume("=")) {
      std::string name;
      while (!at_end() && is_name_char(peek())) name += src_[pos_++];
      if (name.empty()) fail("expected a capture name after '='");
      node.name = name;
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  std::string read_label() {
    std::string label;
    while (!at_end()) {
      const char c = peek();
      if (c == '$' && !label.empty() && (pos_ + 1 >= src_.size() || src_[pos_ + 1] != '.')) {
        label += src_[pos_++];  // PRP$, WP$
        continue;
      }
      if (c == '.' && label.empty()) break;
      if (!is_label_char(c)) break;
      label += src_[pos_++];
    }
    if (label.empty()) fail("expected a node label");
    return label;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<QueryNode> nodes_;
};

// parse_expr pushes nodes in preorder except that a node's relation targets
// are pushed after it, so edge targets always have larger indices. The root
// is node 0.

void pretty_node(const std::vector<QueryNode>& nodes, std::size_t id, std::string& out) {
  const auto& n = nodes[id];
  const auto& p = n.predicate;
  switch (p.kind) {
    case NodePredicate::Kind::any: out += "__"; break;
    case NodePredicate::Kind::labels:
      for (std::size_t i = 0; i < p.labels.size(); ++i) {
        if (i) out += '|';
        out += p.labels[i];
      }
      break;
    case NodePredicate::Kind::regex: {
      out += '/';
      for (char c : p.regex_source) {
        if (c == '/') out += '\\';
        out += c;
      }
      out += '/';
      break;
    }
  }
  if (!p.lemmas.empty()) {
    out += "[lemma=";
    for (std::size_t i = 0; i < p.lemmas.size(); ++i) {
      if (i) out += '|';
      out += p.lemmas[i];
    }
    out += ']';
  }
  if (!n.name.empty()) {
    out += '=';
    out += n.name;
  }
  for (const auto& e : n.edges) {
    out += ' ';
    out += symbol(e.relation);
    out += ' ';
    const bool wrap = !nodes[e.target].edges.empty();
    if (wrap) out += '(';
    pretty_node(nodes, e.target, out);
    if (wrap) out += ')';
  }
}

}  // namespace

std::vector<std::string> TreeQuery::names() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (!n.name.empty()) out.push_back(n.name);
  }
  return out;
}

std::size_t TreeQuery::node_of(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  throw ContractError("query has no capture named '" + std::string(name) + "'");
}

std::string TreeQuery::pretty() const {
  std::string out;
  if (!nodes_.empty()) pretty_node(nodes_, 0, out);
  return out;
}

TreeQuery compile_query(std::string_view source) {
  TreeQuery q;
  q.source_ = std::string(source);
  q.nodes_ = QueryParser(source).parse();

  std::set<std::string> seen;
  for (const auto& n : q.nodes_) {
    if (n.name.empty()) continue;
    if (!seen.insert(n.name).second) {
      throw ValidationError("query capture '" + n.name + "' is used more than once");
    }
  }
  for (const char* required : {"head", "dep"}) {
    if (!seen.count(required)) {
      throw ValidationError(std::string("query lacks a '") + required +
                            "' capture: " + std::string(source));
    }
  }
  return q;
}

}  // namespace idiomspace::treequery
