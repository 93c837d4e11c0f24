#include <algorithm>
#include <limits>
#include <set>

#include "idiomspace/treequery.hpp"

namespace idiomspace::treequery {

using corpus::NodeId;
using corpus::ParseTree;

bool holds(const ParseTree& tree, Relation rel, NodeId a, NodeId b) {
  switch (rel) {
    case Relation::immediately_dominates: {
      const auto& p = tree.node(b).parent;
      return p && *p == a;
    }
    case Relation::dominates:
      return tree.dominates(a, b);
    case Relation::immediately_precedes_sibling:
    case Relation::precedes_sibling: {
      const auto& pa = tree.node(a).parent;
      const auto& pb = tree.node(b).parent;
      if (!pa || !pb || *pa != *pb || a == b) return false;
      const auto& kids = tree.node(*pa).children;
      const auto ia = std::find(kids.begin(), kids.end(), a) - kids.begin();
      const auto ib = std::find(kids.begin(), kids.end(), b) - kids.begin();
      return rel == Relation::immediately_precedes_sibling ? ib == ia + 1 : ib > ia;
    }
  }
  return false;
}

namespace {

// Tree nodes standing in `rel` to `from`, in preorder.
void candidates(const ParseTree& tree, Relation rel, NodeId from, std::vector<NodeId>& out) {
  out.clear();
  const auto& n = tree.node(from);
  switch (rel) {
    case Relation::immediately_dominates:
      out = n.children;
      break;
    case Relation::dominates: {
      // Preorder arena: descendants of `from` occupy a contiguous id range.
      for (NodeId id = from + 1; id < tree.size() && tree.dominates(from, id); ++id) {
        out.push_back(id);
      }
      break;
    }
    case Relation::immediately_precedes_sibling:
    case Relation::precedes_sibling: {
      if (!n.parent) break;
      const auto& kids = tree.node(*n.parent).children;
      auto it = std::find(kids.begin(), kids.end(), from);
      if (it == kids.end()) break;
      ++it;
      if (rel == Relation::immediately_precedes_sibling) {
        if (it != kids.end()) out.push_back(*it);
      } else {
        out.assign(it, kids.end());
      }
      break;
    }
  }
}

class Matcher {
 public:
  Matcher(const TreeQuery& q, const corpus::SentenceRecord& rec)
      : query_(q), tree_(rec.tree), tokens_(rec.tokens), assignment_(q.nodes().size()) {
    // Visit order: each query node after the node that owns its edge.
    const auto& nodes = q.nodes();
    parent_.assign(nodes.size(), {0, Relation::immediately_dominates});
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (const auto& e : nodes[i].edges) parent_[e.target] = {i, e.relation};
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].name.empty()) named_.push_back(i);
    }
  }

  std::set<std::vector<NodeId>> run() {
    if (tree_.empty() || query_.nodes().empty()) return {};
    for (NodeId root = 0; root < tree_.size(); ++root) {
      if (!query_.nodes()[0].predicate.matches(tree_, tokens_, root)) continue;
      assignment_[0] = root;
      extend(1);
    }
    return std::move(found_);
  }

  const std::vector<std::size_t>& named() const { return named_; }

 private:
  void extend(std::size_t next) {
    if (next == query_.nodes().size()) {
      std::vector<NodeId> key;
      key.reserve(named_.size());
      for (auto i : named_) key.push_back(assignment_[i]);
      found_.insert(std::move(key));
      return;
    }
    const auto [owner, rel] = parent_[next];
    std::vector<NodeId> cands;
    candidates(tree_, rel, assignment_[owner], cands);
    const auto& pred = query_.nodes()[next].predicate;
    for (NodeId c : cands) {
      if (!pred.matches(tree_, tokens_, c)) continue;
      assignment_[next] = c;
      extend(next + 1);
    }
  }

  const TreeQuery& query_;
  const ParseTree& tree_;
  const std::vector<corpus::Token>& tokens_;
  std::vector<NodeId> assignment_;
  std::vector<std::pair<std::size_t, Relation>> parent_;
  std::vector<std::size_t> named_;
  std::set<std::vector<NodeId>> found_;
};

}  // namespace

void sort_bindings(std::vector<MatchBinding>& bindings) {
  auto key = [](const MatchBinding& b) {
    std::vector<NodeId> k;
    k.push_back(b.nodes.count("head") ? b.nodes.at("head") : 0);
    k.push_back(b.nodes.count("dep") ? b.nodes.at("dep") : 0);
    for (const auto& [name, id] : b.nodes) {
      if (name != "head" && name != "dep") k.push_back(id);
    }
    return k;
  };
  std::sort(bindings.begin(), bindings.end(),
            [&](const MatchBinding& a, const MatchBinding& b) { return key(a) < key(b); });
}

std::vector<MatchBinding> match_all(const TreeQuery& query, const corpus::SentenceRecord& record) {
  Matcher m(query, record);
  const auto found = m.run();
  std::vector<MatchBinding> out;
  out.reserve(found.size());
  for (const auto& key : found) {
    MatchBinding b;
    b.span_start = std::numeric_limits<std::size_t>::max();
    b.span_end = 0;
    for (std::size_t i = 0; i < key.size(); ++i) {
      b.nodes.emplace(query.nodes()[m.named()[i]].name, key[i]);
      for (auto tok : record.tree.yield(key[i])) {
        b.span_start = std::min(b.span_start, tok);
        b.span_end = std::max(b.span_end, tok);
      }
    }
    out.push_back(std::move(b));
  }
  sort_bindings(out);
  return out;
}

}  // namespace idiomspace::treequery
