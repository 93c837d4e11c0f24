#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "idiomspace/corpus.hpp"
#include "idiomspace/errors.hpp"

namespace idiomspace::corpus {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string default_query(PhraseType type) {
  switch (type) {
    case PhraseType::VO: return "VP < (/^VB/=head $.. (NP < /^NN/=dep))";
    case PhraseType::AN: return "NP < (/^JJ/=dep $.. /^NN/=head)";
    case PhraseType::NN: return "NP < (/^NN/=dep $. /^NN/=head)";
    case PhraseType::B: return "__ < (__=head $. (CC[lemma=and|or] $. __=dep))";
  }
  return {};
}

std::vector<PhraseSpec> read_phrase_list(std::istream& in) {
  static const std::vector<std::string> kColumns = {"phrase_id", "phrase_type", "head_lemma",
                                                    "dep_lemma", "query"};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<PhraseSpec> specs;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split_tabs(line);
    if (!have_header) {
      if (cols.size() < 4 || cols.size() > 5 ||
          !std::equal(cols.begin(), cols.end(), kColumns.begin())) {
        throw ParseError("phrase list header must be: phrase_id, phrase_type, head_lemma, "
                         "dep_lemma[, query]",
                         lineno);
      }
      have_header = true;
      continue;
    }
    if (cols.size() < 4 || cols.size() > 5) {
      throw ParseError("expected 4 or 5 tab-separated columns, got " + std::to_string(cols.size()),
                       lineno);
    }
    const std::string where = "row " + std::to_string(lineno) + " (" + cols[0] + ")";
    if (cols[0].empty()) throw ValidationError(where + ": empty phrase_id");
    auto type = parse_phrase_type(cols[1]);
    if (!type) throw ValidationError(where + ": unknown phrase_type '" + cols[1] + "'");
    if (cols[2].empty() || cols[3].empty()) throw ValidationError(where + ": empty lemma");
    if (cols[2] == cols[3]) throw ValidationError(where + ": head_lemma equals dep_lemma");
    if (!ids.insert(cols[0]).second) throw ValidationError(where + ": duplicate phrase_id");

    PhraseSpec spec;
    spec.phrase_id = cols[0];
    spec.phrase_type = *type;
    spec.head_lemma = cols[2];
    spec.dep_lemma = cols[3];
    if (cols.size() == 5 && !cols[4].empty()) {
      spec.query = cols[4];
      spec.default_query = false;
    } else {
      spec.query = default_query(*type);
    }
    specs.push_back(std::move(spec));
  }
  if (!have_header) throw ParseError("phrase list is missing its header line");
  return specs;
}

std::vector<PhraseSpec> read_phrase_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open phrase list " + path.string());
  return read_phrase_list(in);
}

}  // namespace idiomspace::corpus
