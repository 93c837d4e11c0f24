#ifndef IDIOMSPACE_CORPUS_HPP
#define IDIOMSPACE_CORPUS_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace idiomspace::corpus {

struct Token {
  std::size_t index = 0;
  std::string surface;
  std::string lemma;
  std::string pos;

  bool operator==(const Token&) const = default;
};

using NodeId = std::size_t;

/// Constituency tree stored as a flat node arena in preorder. Node 0 is the
/// root. A node is either internal (one or more children) or a preterminal
/// carrying the index of the token it dominates.
class ParseTree {
 public:
  struct Node {
    std::string label;
    std::vector<NodeId> children;
    std::optional<std::size_t> leaf_token;
    std::optional<NodeId> parent;

    bool operator==(const Node&) const = default;
  };

  ParseTree() = default;

  /// Builder interface used by the reader. add_node appends in preorder.
  NodeId add_internal(std::string label, std::optional<NodeId> parent);
  NodeId add_preterminal(std::string label, std::size_t token, std::optional<NodeId> parent);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  NodeId root() const noexcept { return 0; }

  bool is_preterminal(NodeId id) const { return nodes_.at(id).leaf_token.has_value(); }

  /// Token indices dominated by `id`, left to right.
  std::vector<std::size_t> yield(NodeId id) const;
  /// Token indices of the whole tree, left to right.
  std::vector<std::size_t> leaves() const { return empty() ? std::vector<std::size_t>{} : yield(root()); }

  /// True when `ancestor` properly dominates `descendant`.
  bool dominates(NodeId ancestor, NodeId descendant) const;

  bool operator==(const ParseTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

struct SentenceRecord {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::vector<Token> tokens;
  ParseTree tree;
  // Positions of the neighbouring sentences within the owning corpus.
  std::optional<std::size_t> prev_id;
  std::optional<std::size_t> next_id;
};

/// Immutable after load; safe to share between threads.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<SentenceRecord> records);

  const std::vector<SentenceRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const SentenceRecord& at(std::size_t i) const { return records_.at(i); }
  std::optional<std::size_t> find(std::string_view doc_id, std::size_t sent_index) const;

 private:
  std::vector<SentenceRecord> records_;
  std::map<std::pair<std::string, std::size_t>, std::size_t, std::less<>> index_;
};

/// Parses one bracketed tree. Leaves are `surface|lemma|POS`, `surface|lemma`
/// or bare `surface`; missing lemma falls back to lowercased surface and
/// missing POS to the preterminal label. Throws ParseError with `line`.
std::pair<std::vector<Token>, ParseTree> parse_bracketed(std::string_view text,
                                                         std::size_t line = 0);

/// Inverse of parse_bracketed. Always writes the full `surface|lemma|POS` leaf
/// form so that parse(write(t)) == t.
std::string write_bracketed(const ParseTree& tree, const std::vector<Token>& tokens);

Corpus read_treebank(std::istream& in);
Corpus read_treebank(const std::filesystem::path& path);

/// Number of lines in the stream that start a tree (first non-blank char is
/// '('). Independent of the reader; used for sanity checks.
std::size_t count_tree_lines(std::istream& in);

/// A sentence with its neighbours, flattened for probing.
struct ContextBlock {
  std::vector<std::string> tokens;
  // Offset of the focal sentence's first token inside `tokens`.
  std::size_t focus_offset = 0;
  std::size_t focus_length = 0;
  // Start offsets of each included sentence.
  std::vector<std::size_t> sentence_starts;

  /// Surface text with each sentence wrapped in `<s> ... </s>`.
  std::string text() const;
};

ContextBlock context_block(const Corpus& corpus, std::size_t record);
inline std::string context_text(const Corpus& corpus, std::size_t record) {
  return context_block(corpus, record).text();
}

// ---------------------------------------------------------------------------
// Phrase lists

enum class PhraseType { VO, AN, NN, B };

const char* to_string(PhraseType type);
std::optional<PhraseType> parse_phrase_type(std::string_view text);

enum class Slot { head, dep };
const char* to_string(Slot slot);
std::optional<Slot> parse_slot(std::string_view text);

struct PhraseSpec {
  std::string phrase_id;
  PhraseType phrase_type = PhraseType::VO;
  std::string head_lemma;
  std::string dep_lemma;
  std::string query;
  // True when `query` was synthesized from phrase_type.
  bool default_query = true;

  const std::string& lemma(Slot slot) const {
    return slot == Slot::head ? head_lemma : dep_lemma;
  }
};

/// Tree query used when a phrase-list row leaves the query column empty.
std::string default_query(PhraseType type);

std::vector<PhraseSpec> read_phrase_list(std::istream& in);
std::vector<PhraseSpec> read_phrase_list(const std::filesystem::path& path);

enum class MatchClass { target, head_matched, dep_matched };
const char* to_string(MatchClass cls);
std::optional<MatchClass> parse_match_class(std::string_view text);

struct PhraseInstance {
  std::string phrase_id;
  std::size_t record = 0;  // index into Corpus::records()
  std::size_t span_start = 0;
  std::size_t span_end = 0;  // inclusive
  std::size_t head_index = 0;
  std::size_t dep_index = 0;
  MatchClass match_class = MatchClass::target;

  std::size_t span_length() const noexcept { return span_end - span_start + 1; }
  bool operator==(const PhraseInstance&) const = default;
};

}  // namespace idiomspace::corpus

#endif  // IDIOMSPACE_CORPUS_HPP
