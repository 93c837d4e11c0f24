#ifndef IDIOMSPACE_TABLES_HPP
#define IDIOMSPACE_TABLES_HPP

// Tab-separated score tables exchanged between the pipeline stages. Lines
// starting with '#' are comments; the first other line is the header.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idiomspace/conventionality.hpp"
#include "idiomspace/corpus.hpp"

namespace idiomspace::tables {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

struct InstanceRow {
  std::string phrase_id;
  corpus::MatchClass match_class = corpus::MatchClass::target;
  std::string doc_id;
  std::size_t sent_index = 0;
  std::size_t span_start = 0;
  std::size_t span_end = 0;
  std::size_t head_index = 0;
  std::size_t dep_index = 0;
};

struct ConvRow {
  std::string phrase_id;
  corpus::Slot slot = corpus::Slot::head;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<double> value;  // absent when flagged
  bool flagged = false;
  std::string provider_fingerprint;
  conventionality::Group group = conventionality::Group::target;
};

struct ContRow {
  std::string phrase_id;
  corpus::MatchClass match_class = corpus::MatchClass::target;
  std::string doc_id;
  std::size_t sent_index = 0;
  double value = 0.0;
  double joint_logprob = 0.0;
  std::size_t n_span_words = 0;
  std::string provider_fingerprint;
};

InstanceRow instance_row(const corpus::Corpus& corpus, const corpus::PhraseInstance& instance);

/// Writers emit an optional "# manifest: <digest>" comment, the header, then
/// one line per row.
void write_instances(std::ostream& out, const std::vector<InstanceRow>& rows,
                     const std::string& manifest = {});
void write_conv(std::ostream& out, const std::vector<ConvRow>& rows,
                const std::string& manifest = {});
void write_cont(std::ostream& out, const std::vector<ContRow>& rows,
                const std::string& manifest = {});

/// Readers throw ParseError with the offending line on malformed input.
std::vector<InstanceRow> read_instances(std::istream& in);
std::vector<ConvRow> read_conv(std::istream& in);
std::vector<ContRow> read_cont(std::istream& in);
std::vector<ConvRow> read_conv(const std::filesystem::path& path);
std::vector<ContRow> read_cont(const std::filesystem::path& path);

}  // namespace idiomspace::tables

#endif  // IDIOMSPACE_TABLES_HPP
