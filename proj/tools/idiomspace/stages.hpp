#ifndef IDIOMSPACE_TOOLS_STAGES_HPP
#define IDIOMSPACE_TOOLS_STAGES_HPP

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idiomspace/analysis.hpp"
#include "idiomspace/conventionality.hpp"
#include "idiomspace/corpus.hpp"
#include "idiomspace/extraction.hpp"
#include "idiomspace/providers.hpp"
#include "idiomspace/tables.hpp"

namespace idiomspace::cli {

namespace fs = std::filesystem;

void set_verbosity(int level);  // 0 quiet, 1 normal, 2 verbose
void log_info(const std::string& stage, const std::string& message);
void log_debug(const std::string& stage, const std::string& message);

/// Writes `path` through `path.partial`, renamed once `body` succeeds. A
/// failing body leaves the .partial file behind.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body);

struct Inputs {
  fs::path corpus_path;
  fs::path phrases_path;
  corpus::Corpus corpus;
  std::vector<corpus::PhraseSpec> phrases;
};

Inputs load_inputs(const fs::path& corpus_path, const fs::path& phrases_path);
std::vector<corpus::PhraseSpec> load_phrases(const fs::path& phrases_path);

using InstanceMap = std::map<std::string, treequery::InstanceSets>;

/// Runs extraction for every phrase; rows follow phrase-list order, then match
/// class, then corpus position.
std::vector<tables::InstanceRow> extract_stage(const Inputs& inputs, std::size_t jobs);

/// Resolves instance rows against the corpus. Throws ValidationError on rows
/// that name unknown phrases, sentences or out-of-range tokens.
InstanceMap resolve_instances(const Inputs& inputs, const std::vector<tables::InstanceRow>& rows);

/// Reads `path` if given, else re-extracts.
InstanceMap instances_for(const Inputs& inputs, const std::optional<fs::path>& path,
                          std::size_t jobs);

struct ConvSettings {
  conventionality::ScoreOptions score;
  std::size_t jobs = 1;
};

/// Four rows per phrase: target head, target dep, matched head, matched dep.
/// On failure the finished prefix is written to `partial` before rethrowing.
std::vector<tables::ConvRow> conv_stage(const Inputs& inputs, const InstanceMap& instances,
                                        providers::Provider& provider,
                                        const ConvSettings& settings, const fs::path& partial);

struct ContSettings {
  std::vector<std::string> padding;
  std::size_t jobs = 1;
};

std::vector<tables::ContRow> cont_stage(const Inputs& inputs, const InstanceMap& instances,
                                        providers::Provider& provider,
                                        const ContSettings& settings, const fs::path& partial);

/// "mean" or "value:<conv>,<cont>". Throws ConfigError.
std::optional<std::pair<double, double>> parse_thresholds(const std::string& text);

struct AnalyzeSettings {
  analysis::ReportOptions report;
  std::optional<fs::path> ratings;
  std::optional<std::size_t> sweep_max;  // emit sweep/min_<N> for N = 10, 20, ..
};

/// Builds and writes report.json, summaries.tsv and scatter.svg into
/// `out_dir`, plus the threshold sweep when requested.
analysis::AnalysisReport analyze_stage(const std::vector<corpus::PhraseSpec>& phrases,
                                       const std::vector<tables::ConvRow>& conv,
                                       const std::vector<tables::ContRow>& cont,
                                       const AnalyzeSettings& settings, const fs::path& out_dir);

/// The padding tokens and a label for the manifest.
std::vector<std::string> load_padding(const std::optional<fs::path>& path);

}  // namespace idiomspace::cli

#endif  // IDIOMSPACE_TOOLS_STAGES_HPP
