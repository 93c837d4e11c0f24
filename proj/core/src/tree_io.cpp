#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <memory>

#include "idiomspace/corpus.hpp"
#include "idiomspace/errors.hpp"

namespace idiomspace::corpus {

namespace {

// Intermediate recursive form; flattened into a ParseTree once complete so
// that an unlabeled wrapper `( (S ...) )` can be dropped first.
struct RawNode {
  std::string label;
  std::string atom;
  std::vector<std::unique_ptr<RawNode>> children;
  std::size_t column = 0;
};

class BracketParser {
 public:
  BracketParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  std::unique_ptr<RawNode> parse() {
    skip_space();
    if (pos_ >= text_.size()) fail("empty tree");
    auto root = parse_node();
    skip_space();
    if (pos_ < text_.size()) fail("trailing characters after tree");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, pos_ + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string read_atom() {
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(begin, pos_ - begin));
  }

  std::unique_ptr<RawNode> parse_node() {
    if (pos_ >= text_.size() || text_[pos_] != '(') fail("expected '('");
    auto node = std::make_unique<RawNode>();
    node->column = pos_ + 1;
    ++pos_;
    skip_space();
    node->label = read_atom();
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) fail("unbalanced brackets: missing ')'");
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        if (!node->atom.empty()) fail("node mixes a leaf with subtrees");
        node->children.push_back(parse_node());
      } else {
        if (!node->children.empty() || !node->atom.empty()) {
          fail("node mixes a leaf with subtrees");
        }
        node->atom = read_atom();
      }
    }
    if (node->atom.empty() && node->children.empty()) {
      pos_ = node->column - 1;
      fail(node->label.empty() ? "empty tree" : "empty node '" + node->label + "'");
    }
    if (node->label.empty() && !node->atom.empty()) {
      pos_ = node->column - 1;
      fail("leaf without a preterminal label");
    }
    return node;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Token make_token(const RawNode& pre, std::size_t index, std::size_t line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t bar = pre.atom.find('|', start);
    fields.push_back(pre.atom.substr(start, bar == std::string::npos ? std::string::npos : bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  if (fields.size() > 3) throw ParseError("leaf '" + pre.atom + "' has more than 3 fields", line, pre.column);
  Token tok;
  tok.index = index;
  tok.surface = fields[0];
  if (tok.surface.empty()) throw ParseError("empty surface form", line, pre.column);
  tok.lemma = fields.size() >= 2 && !fields[1].empty() ? fields[1] : lowercase(tok.surface);
  tok.pos = fields.size() == 3 && !fields[2].empty() ? fields[2] : pre.label;
  return tok;
}

void flatten(const RawNode& raw, std::optional<NodeId> parent, ParseTree& tree,
             std::vector<Token>& tokens, std::size_t line) {
  if (!raw.atom.empty()) {
    tokens.push_back(make_token(raw, tokens.size(), line));
    tree.add_preterminal(raw.label, tokens.back().index, parent);
    return;
  }
  const NodeId id = tree.add_internal(raw.label, parent);
  for (const auto& child : raw.children) flatten(*child, id, tree, tokens, line);
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

void write_node(const ParseTree& tree, NodeId id, const std::vector<Token>& tokens,
                std::string& out) {
  const auto& n = tree.node(id);
  out += '(';
  out += n.label;
  if (n.leaf_token) {
    const Token& t = tokens.at(*n.leaf_token);
    out += ' ';
    out += t.surface;
    out += '|';
    out += t.lemma;
    out += '|';
    out += t.pos;
  } else {
    for (NodeId c : n.children) {
      out += ' ';
      write_node(tree, c, tokens, out);
    }
  }
  out += ')';
}

}  // namespace

std::pair<std::vector<Token>, ParseTree> parse_bracketed(std::string_view text, std::size_t line) {
  BracketParser parser(text, line);
  std::unique_ptr<RawNode> root = parser.parse();
  while (root->label.empty() && root->children.size() == 1) {
    root = std::move(root->children.front());
  }
  std::vector<Token> tokens;
  ParseTree tree;
  flatten(*root, std::nullopt, tree, tokens, line);
  return {std::move(tokens), std::move(tree)};
}

std::string write_bracketed(const ParseTree& tree, const std::vector<Token>& tokens) {
  std::string out;
  if (!tree.empty()) write_node(tree, tree.root(), tokens, out);
  return out;
}

Corpus read_treebank(std::istream& in) {
  std::vector<SentenceRecord> records;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::string> doc;
  std::size_t next_sent = 0;
  std::vector<std::string> seen_docs;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (starts_with(view, "#doc")) {
      std::string_view rest = view.substr(4);
      if (!rest.empty() && !std::isspace(static_cast<unsigned char>(rest.front()))) {
        continue;  // e.g. "#document notes" is an ordinary comment
      }
      rest = trim(rest);
      if (rest.empty()) throw ParseError("#doc directive without an id", lineno);
      std::string id(rest);
      if (std::find(seen_docs.begin(), seen_docs.end(), id) != seen_docs.end()) {
        throw ParseError("document '" + id + "' opened twice", lineno);
      }
      seen_docs.push_back(id);
      doc = std::move(id);
      next_sent = 0;
      continue;
    }
    if (view.front() == '#') continue;
    if (!doc) throw ParseError("tree before the first #doc directive", lineno);

    auto [tokens, tree] = parse_bracketed(view, lineno);
    SentenceRecord rec;
    rec.doc_id = *doc;
    rec.sent_index = next_sent++;
    rec.tokens = std::move(tokens);
    rec.tree = std::move(tree);
    if (rec.sent_index > 0) {
      rec.prev_id = records.size() - 1;
      records.back().next_id = records.size();
    }
    records.push_back(std::move(rec));
  }
  return Corpus(std::move(records));
}

Corpus read_treebank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open treebank " + path.string());
  return read_treebank(in);
}

std::size_t count_tree_lines(std::istream& in) {
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == '(') ++n;
  }
  return n;
}

}  // namespace idiomspace::corpus
