#ifndef IDIOMSPACE_ANALYSIS_HPP
#define IDIOMSPACE_ANALYSIS_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "idiomspace/conventionality.hpp"
#include "idiomspace/corpus.hpp"
#include "idiomspace/statistics.hpp"
#include "idiomspace/tables.hpp"

namespace idiomspace::analysis {

using conventionality::Group;

inline constexpr std::size_t kDefaultMinInstances = 30;

struct PhraseSummary {
  std::string phrase_id;
  corpus::PhraseType phrase_type = corpus::PhraseType::VO;
  Group group = Group::target;
  std::size_t target_instances = 0;
  std::size_t matched_instances = 0;  // head-matched plus dep-matched
  std::optional<double> mean_contingency;
  std::optional<double> head_conv;
  std::optional<double> dep_conv;
  std::optional<double> phrase_conv;
  bool included = false;

  /// Included and carrying both coordinates of the quadrant plot.
  bool plotted() const noexcept { return included && mean_contingency && phrase_conv; }
};

/// One summary per phrase and group, in phrase-list order, target first.
/// `contingency_scale` multiplies contingency values (1/ln 2 for bits).
std::vector<PhraseSummary> summarize(std::span<const corpus::PhraseSpec> phrases,
                                     std::span<const tables::ConvRow> conv,
                                     std::span<const tables::ContRow> cont,
                                     std::size_t min_instances = kDefaultMinInstances,
                                     double contingency_scale = 1.0);

enum class Quadrant { low_conv_high_cont, high_conv_high_cont, low_conv_low_cont, high_conv_low_cont };
inline constexpr std::array<Quadrant, 4> kQuadrants = {
    Quadrant::low_conv_high_cont, Quadrant::high_conv_high_cont, Quadrant::low_conv_low_cont,
    Quadrant::high_conv_low_cont};
const char* to_string(Quadrant q);

struct Point {
  double conv = 0.0;
  double cont = 0.0;
};

/// A value equal to its threshold counts as high.
Quadrant classify(const Point& p, double conv_threshold, double cont_threshold);

struct QuadrantResult {
  double conv_threshold = 0.0;
  double cont_threshold = 0.0;
  std::vector<Quadrant> labels;  // aligned with the input points
  std::array<std::size_t, 4> counts{};  // indexed like kQuadrants

  std::size_t count(Quadrant q) const { return counts[static_cast<std::size_t>(q)]; }
};

/// Thresholds at the mean of each coordinate. Throws InsufficientDataError on
/// an empty list.
QuadrantResult quadrant_assign(std::span<const Point> points);
/// Fixed thresholds.
QuadrantResult quadrant_assign(std::span<const Point> points, double conv_threshold,
                               double cont_threshold);

struct TypeAsymmetry {
  corpus::PhraseType phrase_type = corpus::PhraseType::VO;
  std::size_t n = 0;
  double head_mean = 0.0;
  double dep_mean = 0.0;
  double phrase_mean = 0.0;
  std::optional<TTest> test;
  std::string error;  // why `test` is absent
};

struct AsymmetryResult {
  Group group = Group::target;
  std::size_t n = 0;
  double head_mean = 0.0;
  double dep_mean = 0.0;
  TTest test;
  std::vector<TypeAsymmetry> by_type;
};

/// Welch test of head against dep conventionality over the included summaries
/// of `group` that have both scores. Binomials count their first conjunct as
/// the head.
AsymmetryResult asymmetry_test(std::span<const PhraseSummary> summaries, Group group);

enum class Element { head, dep, phrase };
const char* to_string(Element e);
std::optional<Element> parse_element(std::string_view text);

struct RatingRecord {
  std::string participant;
  std::string item;
  std::string phrase_id;
  Element element = Element::phrase;
  int rating = 1;
};

inline constexpr int kRatingMin = 1;
inline constexpr int kRatingMax = 6;

/// Columns participant, item, phrase_id, element, rating.
std::vector<RatingRecord> read_ratings(std::istream& in);
std::vector<RatingRecord> read_ratings(const std::filesystem::path& path);

using ScoreKey = std::pair<std::string, Element>;

/// Target-group conventionality of each (phrase, element) with a score.
std::map<ScoreKey, double> element_scores(std::span<const PhraseSummary> summaries);

struct RatingsResult {
  Regression regression;
  std::size_t items = 0;    // rated (item, element) pairs with a score
  std::size_t ratings = 0;  // individual ratings behind them
};

/// OLS of the mean rating of each (item, element) on the conventionality of
/// that element. Ratings without a score are skipped; fewer than three pairs
/// throw InsufficientDataError.
RatingsResult ratings_regression(std::span<const RatingRecord> ratings,
                                 const std::map<ScoreKey, double>& scores);

/// Phrases whose mean head-element rating is at most `max_rating`, sorted.
std::vector<std::string> literal_head_phrases(std::span<const RatingRecord> ratings,
                                              double max_rating);

struct ReportOptions {
  std::size_t min_instances = kDefaultMinInstances;
  std::optional<std::pair<double, double>> fixed_thresholds;  // (conv, cont)
  bool group_by_type = false;
  bool bits = false;
  std::optional<double> literal_max_rating;
  std::string manifest;  // digest of the run manifest, if any
};

struct GroupMeans {
  std::size_t n = 0;
  double conventionality = 0.0;
  double contingency = 0.0;
  double head_conventionality = 0.0;
  double dep_conventionality = 0.0;
};

template <class T>
struct Outcome {
  std::optional<T> result;
  std::string error;
};

struct TypeReport {
  corpus::PhraseType phrase_type = corpus::PhraseType::VO;
  GroupMeans target;
  GroupMeans matched;
  Outcome<TTest> contingency_comparison;
};

struct LiteralSubset {
  double max_rating = 0.0;
  std::vector<std::string> phrases;
  std::size_t plotted = 0;
  std::array<std::size_t, 4> counts{};
};

struct AnalysisReport {
  ReportOptions options;
  std::size_t phrases_total = 0;
  std::size_t phrases_included = 0;
  std::vector<PhraseSummary> summaries;
  GroupMeans target;
  GroupMeans matched;
  std::size_t paired_n = 0;
  double mean_difference = 0.0;
  Outcome<TTest> contingency_comparison;
  Outcome<Correlation> correlation;
  QuadrantResult quadrants;
  std::vector<std::size_t> plotted;  // summary index of each quadrant label
  Outcome<AsymmetryResult> asymmetry_target;
  Outcome<AsymmetryResult> asymmetry_matched;
  std::vector<TypeReport> by_type;
  std::optional<Outcome<RatingsResult>> ratings;
  std::optional<LiteralSubset> literal_subset;

  std::optional<Quadrant> quadrant_of(std::size_t summary_index) const;
};

/// Throws InsufficientDataError when no phrase survives the filter or no
/// included phrase has both coordinates.
AnalysisReport build_report(std::span<const corpus::PhraseSpec> phrases,
                            std::span<const tables::ConvRow> conv,
                            std::span<const tables::ContRow> cont,
                            std::span<const RatingRecord> ratings, const ReportOptions& options);

std::string report_json(const AnalysisReport& report);
std::string summaries_tsv(const AnalysisReport& report);
std::string scatter_svg(const AnalysisReport& report);

/// Writes report.json, summaries.tsv and scatter.svg into `dir`, each through
/// a temporary file renamed on success.
void write_report(const AnalysisReport& report, const std::filesystem::path& dir);

}  // namespace idiomspace::analysis

#endif  // IDIOMSPACE_ANALYSIS_HPP
