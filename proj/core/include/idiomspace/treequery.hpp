#ifndef IDIOMSPACE_TREEQUERY_HPP
#define IDIOMSPACE_TREEQUERY_HPP

#include <cstddef>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "idiomspace/corpus.hpp"

namespace idiomspace::treequery {

// A Tregex-style pattern language restricted to four relations:
//
//   A < B     A immediately dominates B
//   A << B    A dominates B
//   A $. B    A is the sister immediately before B
//   A $.. B   A is a sister somewhere before B
//
// Node predicates: `__` (any node), `NP|NX` (label alternatives),
// `/^NN/` (ECMAScript regex searched in the label), optionally followed by
// `[lemma=bean|beans]` (preterminal whose token lemma is listed) and by a
// capture name `=head`. Relations chain off the node on their left;
// parentheses group a node with its own relations. See docs/query-language.md.

enum class Relation {
  immediately_dominates,
  dominates,
  immediately_precedes_sibling,
  precedes_sibling,
};

const char* symbol(Relation rel);

struct NodePredicate {
  enum class Kind { any, labels, regex };
  Kind kind = Kind::any;
  std::vector<std::string> labels;
  std::string regex_source;
  std::shared_ptr<const std::regex> regex;
  std::vector<std::string> lemmas;  // empty: no lemma constraint

  bool matches(const corpus::ParseTree& tree, const std::vector<corpus::Token>& tokens,
               corpus::NodeId node) const;
};

struct QueryNode {
  NodePredicate predicate;
  std::string name;  // empty when anonymous
  struct Edge {
    Relation relation;
    std::size_t target;  // index into TreeQuery::nodes()
  };
  std::vector<Edge> edges;
};

class TreeQuery {
 public:
  /// Node 0 is the root; edges point to strictly larger indices.
  const std::vector<QueryNode>& nodes() const noexcept { return nodes_; }
  const std::string& source() const noexcept { return source_; }

  /// Capture names in node order.
  std::vector<std::string> names() const;
  std::size_t node_of(std::string_view name) const;

  /// Canonical text; compile(pretty()) reproduces the same query.
  std::string pretty() const;

 private:
  friend TreeQuery compile_query(std::string_view source);
  std::vector<QueryNode> nodes_;
  std::string source_;
};

/// Throws ParseError (column = offending position, 1-based) on bad syntax and
/// ValidationError when the `head` or `dep` capture is missing or a name is
/// used twice.
TreeQuery compile_query(std::string_view source);

/// Named captures of one match.
struct MatchBinding {
  std::map<std::string, corpus::NodeId> nodes;
  std::size_t span_start = 0;
  std::size_t span_end = 0;  // inclusive, over the yields of all bound nodes

  corpus::NodeId at(const std::string& name) const { return nodes.at(name); }
  bool operator==(const MatchBinding&) const = default;
};

/// Every distinct assignment of capture names to tree nodes that can be
/// extended to a full assignment satisfying all predicates and relations.
/// Ordered by the head node's preorder position, then the dep node's, then the
/// remaining captures by name.
std::vector<MatchBinding> match_all(const TreeQuery& query, const corpus::SentenceRecord& record);

/// True when tree node `b` stands in `rel` to tree node `a`.
bool holds(const corpus::ParseTree& tree, Relation rel, corpus::NodeId a, corpus::NodeId b);

/// Orders bindings the way match_all does.
void sort_bindings(std::vector<MatchBinding>& bindings);

}  // namespace idiomspace::treequery

#endif  // IDIOMSPACE_TREEQUERY_HPP
