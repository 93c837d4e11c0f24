#include "idiomspace/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>

#include "idiomspace/errors.hpp"

namespace idiomspace::analysis {

namespace {

double average(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void check_fingerprints(std::span<const tables::ConvRow> conv, std::span<const tables::ContRow> cont) {
  auto check = [](const auto& rows, const char* what) {
    for (const auto& r : rows) {
      if (r.provider_fingerprint != rows.front().provider_fingerprint) {
        throw ValidationError(std::string(what) + " table mixes provider fingerprints " +
                              rows.front().provider_fingerprint + " and " +
                              r.provider_fingerprint);
      }
    }
  };
  check(conv, "conventionality");
  check(cont, "contingency");
}

GroupMeans group_means(const std::vector<PhraseSummary>& summaries, Group group) {
  GroupMeans m;
  double head_sum = 0.0;
  double dep_sum = 0.0;
  for (const auto& s : summaries) {
    if (s.group != group || !s.plotted()) continue;
    ++m.n;
    m.conventionality += *s.phrase_conv;
    m.contingency += *s.mean_contingency;
    head_sum += *s.head_conv;
    dep_sum += *s.dep_conv;
  }
  if (m.n > 0) {
    const auto n = static_cast<double>(m.n);
    m.conventionality /= n;
    m.contingency /= n;
    m.head_conventionality = head_sum / n;
    m.dep_conventionality = dep_sum / n;
  }
  return m;
}

// Per-phrase target minus matched contingency, over phrases with both.
std::vector<double> contingency_differences(const std::vector<PhraseSummary>& summaries,
                                            std::optional<corpus::PhraseType> type) {
  std::map<std::string, double> target;
  std::vector<double> diffs;
  for (const auto& s : summaries) {
    if (!s.included || !s.mean_contingency) continue;
    if (type && s.phrase_type != *type) continue;
    if (s.group == Group::target) {
      target[s.phrase_id] = *s.mean_contingency;
    } else if (const auto it = target.find(s.phrase_id); it != target.end()) {
      diffs.push_back(it->second - *s.mean_contingency);
    }
  }
  return diffs;
}

template <class T, class F>
Outcome<T> attempt(F&& f) {
  Outcome<T> out;
  try {
    out.result = f();
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<PhraseSummary> summarize(std::span<const corpus::PhraseSpec> phrases,
                                     std::span<const tables::ConvRow> conv,
                                     std::span<const tables::ContRow> cont,
                                     std::size_t min_instances, double contingency_scale) {
  check_fingerprints(conv, cont);
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < phrases.size(); ++i) position[phrases[i].phrase_id] = i;
  auto locate = [&](const std::string& id) {
    const auto it = position.find(id);
    if (it == position.end()) throw ValidationError("score table names unknown phrase '" + id + "'");
    return it->second;
  };

  struct Accumulator {
    std::size_t target = 0;
    std::size_t matched = 0;
    std::vector<double> cont[2];
    std::optional<double> conv[2][2];  // [group][slot]
    bool seen[2][2] = {};
  };
  std::vector<Accumulator> acc(phrases.size());

  for (const auto& r : cont) {
    auto& a = acc[locate(r.phrase_id)];
    const bool target = r.match_class == corpus::MatchClass::target;
    (target ? a.target : a.matched) += 1;
    a.cont[target ? 0 : 1].push_back(r.value * contingency_scale);
  }
  for (const auto& r : conv) {
    auto& a = acc[locate(r.phrase_id)];
    const auto g = static_cast<std::size_t>(r.group);
    const auto s = static_cast<std::size_t>(r.slot);
    if (a.seen[g][s]) {
      throw ValidationError("duplicate conventionality row for " + r.phrase_id + " " +
                            corpus::to_string(r.slot) + " " + conventionality::to_string(r.group));
    }
    a.seen[g][s] = true;
    if (!r.flagged) a.conv[g][s] = r.value;
  }

  std::vector<PhraseSummary> out;
  out.reserve(2 * phrases.size());
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    const auto& a = acc[i];
    for (const Group group : {Group::target, Group::matched}) {
      const auto g = static_cast<std::size_t>(group);
      PhraseSummary s;
      s.phrase_id = phrases[i].phrase_id;
      s.phrase_type = phrases[i].phrase_type;
      s.group = group;
      s.target_instances = a.target;
      s.matched_instances = a.matched;
      if (!a.cont[g].empty()) s.mean_contingency = average(a.cont[g]);
      s.head_conv = a.conv[g][static_cast<std::size_t>(corpus::Slot::head)];
      s.dep_conv = a.conv[g][static_cast<std::size_t>(corpus::Slot::dep)];
      if (s.head_conv && s.dep_conv) {
        s.phrase_conv = conventionality::phrase_conventionality(*s.head_conv, *s.dep_conv);
      }
      s.included = a.target >= min_instances && a.matched >= min_instances;
      out.push_back(std::move(s));
    }
  }
  return out;
}

const char* to_string(Quadrant q) {
  switch (q) {
    case Quadrant::low_conv_high_cont: return "low_conv_high_cont";
    case Quadrant::high_conv_high_cont: return "high_conv_high_cont";
    case Quadrant::low_conv_low_cont: return "low_conv_low_cont";
    case Quadrant::high_conv_low_cont: return "high_conv_low_cont";
  }
  return "?";
}

Quadrant classify(const Point& p, double conv_threshold, double cont_threshold) {
  const bool high_conv = p.conv >= conv_threshold;
  const bool high_cont = p.cont >= cont_threshold;
  if (high_cont) return high_conv ? Quadrant::high_conv_high_cont : Quadrant::low_conv_high_cont;
  return high_conv ? Quadrant::high_conv_low_cont : Quadrant::low_conv_low_cont;
}

QuadrantResult quadrant_assign(std::span<const Point> points, double conv_threshold,
                               double cont_threshold) {
  QuadrantResult out;
  out.conv_threshold = conv_threshold;
  out.cont_threshold = cont_threshold;
  out.labels.reserve(points.size());
  for (const auto& p : points) {
    out.labels.push_back(classify(p, conv_threshold, cont_threshold));
    ++out.counts[static_cast<std::size_t>(out.labels.back())];
  }
  return out;
}

QuadrantResult quadrant_assign(std::span<const Point> points) {
  if (points.empty()) throw InsufficientDataError("quadrant assignment needs at least one point");
  double conv = 0.0;
  double cont = 0.0;
  for (const auto& p : points) {
    conv += p.conv;
    cont += p.cont;
  }
  const auto n = static_cast<double>(points.size());
  return quadrant_assign(points, conv / n, cont / n);
}

AsymmetryResult asymmetry_test(std::span<const PhraseSummary> summaries, Group group) {
  AsymmetryResult out;
  out.group = group;
  std::vector<double> head;
  std::vector<double> dep;
  std::map<corpus::PhraseType, std::array<std::vector<double>, 3>> per_type;
  for (const auto& s : summaries) {
    if (s.group != group || !s.included || !s.head_conv || !s.dep_conv) continue;
    head.push_back(*s.head_conv);
    dep.push_back(*s.dep_conv);
    auto& t = per_type[s.phrase_type];
    t[0].push_back(*s.head_conv);
    t[1].push_back(*s.dep_conv);
    t[2].push_back(*s.phrase_conv);
  }
  if (head.empty()) {
    throw InsufficientDataError(std::string("no included ") + conventionality::to_string(group) +
                                " phrases with head and dep conventionality");
  }
  out.n = head.size();
  out.head_mean = average(head);
  out.dep_mean = average(dep);
  out.test = welch_t_test(head, dep);
  for (const auto& [type, values] : per_type) {
    TypeAsymmetry t;
    t.phrase_type = type;
    t.n = values[0].size();
    t.head_mean = average(values[0]);
    t.dep_mean = average(values[1]);
    t.phrase_mean = average(values[2]);
    try {
      t.test = welch_t_test(values[0], values[1]);
    } catch (const Error& e) {
      t.error = e.what();
    }
    out.by_type.push_back(std::move(t));
  }
  return out;
}

const char* to_string(Element e) {
  switch (e) {
    case Element::head: return "head";
    case Element::dep: return "dep";
    case Element::phrase: return "phrase";
  }
  return "?";
}

std::optional<Element> parse_element(std::string_view text) {
  if (text == "head") return Element::head;
  if (text == "dep") return Element::dep;
  if (text == "phrase") return Element::phrase;
  return std::nullopt;
}

std::vector<RatingRecord> read_ratings(std::istream& in) {
  static constexpr const char* kHeader[] = {"participant", "item", "phrase_id", "element", "rating"};
  std::vector<RatingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 5) {
      throw ParseError("ratings row has " + std::to_string(f.size()) + " fields, expected 5",
                       line_no);
    }
    if (!have_header) {
      for (std::size_t i = 0; i < 5; ++i) {
        if (f[i] != kHeader[i]) {
          throw ParseError("ratings header column " + std::to_string(i + 1) + " is '" + f[i] +
                               "', expected '" + kHeader[i] + "'",
                           line_no);
        }
      }
      have_header = true;
      continue;
    }
    RatingRecord r;
    r.participant = f[0];
    r.item = f[1];
    r.phrase_id = f[2];
    const auto element = parse_element(f[3]);
    if (!element) throw ParseError("unknown rated element '" + f[3] + "'", line_no);
    r.element = *element;
    const auto [p, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.rating);
    if (ec != std::errc() || p != f[4].data() + f[4].size()) {
      throw ParseError("rating '" + f[4] + "' is not an integer", line_no);
    }
    if (r.rating < kRatingMin || r.rating > kRatingMax) {
      throw ValidationError("line " + std::to_string(line_no) + ": rating " + f[4] +
                            " outside the 1-6 scale");
    }
    out.push_back(std::move(r));
  }
  if (!have_header) throw ParseError("ratings table has no header");
  return out;
}

std::vector<RatingRecord> read_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_ratings(in);
}

std::map<ScoreKey, double> element_scores(std::span<const PhraseSummary> summaries) {
  std::map<ScoreKey, double> out;
  for (const auto& s : summaries) {
    if (s.group != Group::target) continue;
    if (s.head_conv) out[{s.phrase_id, Element::head}] = *s.head_conv;
    if (s.dep_conv) out[{s.phrase_id, Element::dep}] = *s.dep_conv;
    if (s.phrase_conv) out[{s.phrase_id, Element::phrase}] = *s.phrase_conv;
  }
  return out;
}

RatingsResult ratings_regression(std::span<const RatingRecord> ratings,
                                 const std::map<ScoreKey, double>& scores) {
  struct Cell {
    double sum = 0.0;
    std::size_t n = 0;
    double score = 0.0;
  };
  std::map<std::tuple<std::string, std::string, Element>, Cell> cells;
  RatingsResult out;
  for (const auto& r : ratings) {
    const auto it = scores.find({r.phrase_id, r.element});
    if (it == scores.end()) continue;
    auto& c = cells[{r.item, r.phrase_id, r.element}];
    c.sum += r.rating;
    ++c.n;
    c.score = it->second;
    ++out.ratings;
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [key, c] : cells) {
    x.push_back(c.score);
    y.push_back(c.sum / static_cast<double>(c.n));
  }
  out.items = x.size();
  if (out.items < 3) {
    throw InsufficientDataError("ratings regression needs at least three scored items, got " +
                                std::to_string(out.items));
  }
  out.regression = ols(x, y);
  return out;
}

std::vector<std::string> literal_head_phrases(std::span<const RatingRecord> ratings,
                                              double max_rating) {
  std::map<std::string, std::pair<double, std::size_t>> head;
  for (const auto& r : ratings) {
    if (r.element != Element::head) continue;
    auto& h = head[r.phrase_id];
    h.first += r.rating;
    ++h.second;
  }
  std::vector<std::string> out;
  for (const auto& [id, h] : head) {
    if (h.first / static_cast<double>(h.second) <= max_rating) out.push_back(id);
  }
  return out;
}

std::optional<Quadrant> AnalysisReport::quadrant_of(std::size_t summary_index) const {
  const auto it = std::find(plotted.begin(), plotted.end(), summary_index);
  if (it == plotted.end()) return std::nullopt;
  return quadrants.labels[static_cast<std::size_t>(it - plotted.begin())];
}

AnalysisReport build_report(std::span<const corpus::PhraseSpec> phrases,
                            std::span<const tables::ConvRow> conv,
                            std::span<const tables::ContRow> cont,
                            std::span<const RatingRecord> ratings, const ReportOptions& options) {
  AnalysisReport report;
  report.options = options;
  report.summaries = summarize(phrases, conv, cont, options.min_instances,
                               options.bits ? 1.0 / std::numbers::ln2 : 1.0);
  const auto& summaries = report.summaries;
  report.phrases_total = phrases.size();
  for (const auto& s : summaries) {
    if (s.group == Group::target && s.included) ++report.phrases_included;
  }
  if (report.phrases_included == 0) {
    throw InsufficientDataError("no phrase has at least " + std::to_string(options.min_instances) +
                                " target and matched instances; the report would be empty");
  }

  std::vector<Point> points;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (!summaries[i].plotted()) continue;
    report.plotted.push_back(i);
    points.push_back({*summaries[i].phrase_conv, *summaries[i].mean_contingency});
  }
  if (points.empty()) {
    throw InsufficientDataError(
        "no included phrase has both a conventionality and a contingency score");
  }
  report.quadrants = options.fixed_thresholds
                         ? quadrant_assign(points, options.fixed_thresholds->first,
                                           options.fixed_thresholds->second)
                         : quadrant_assign(points);

  report.target = group_means(summaries, Group::target);
  report.matched = group_means(summaries, Group::matched);

  const auto diffs = contingency_differences(summaries, std::nullopt);
  report.paired_n = diffs.size();
  if (!diffs.empty()) report.mean_difference = average(diffs);
  report.contingency_comparison = attempt<TTest>([&] { return paired_t_test(diffs); });

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    xs.push_back(p.conv);
    ys.push_back(p.cont);
  }
  report.correlation = attempt<Correlation>([&] { return pearson(xs, ys); });
  report.asymmetry_target =
      attempt<AsymmetryResult>([&] { return asymmetry_test(summaries, Group::target); });
  report.asymmetry_matched =
      attempt<AsymmetryResult>([&] { return asymmetry_test(summaries, Group::matched); });

  if (options.group_by_type) {
    std::set<corpus::PhraseType> types;
    for (const auto& s : summaries) {
      if (s.included) types.insert(s.phrase_type);
    }
    for (const auto type : types) {
      std::vector<PhraseSummary> subset;
      for (const auto& s : summaries) {
        if (s.phrase_type == type) subset.push_back(s);
      }
      TypeReport t;
      t.phrase_type = type;
      t.target = group_means(subset, Group::target);
      t.matched = group_means(subset, Group::matched);
      const auto type_diffs = contingency_differences(subset, type);
      t.contingency_comparison = attempt<TTest>([&] { return paired_t_test(type_diffs); });
      report.by_type.push_back(std::move(t));
    }
  }

  if (!ratings.empty()) {
    const auto scores = element_scores(summaries);
    report.ratings = attempt<RatingsResult>([&] { return ratings_regression(ratings, scores); });
  }
  if (options.literal_max_rating) {
    LiteralSubset subset;
    subset.max_rating = *options.literal_max_rating;
    subset.phrases = literal_head_phrases(ratings, subset.max_rating);
    const std::set<std::string> wanted(subset.phrases.begin(), subset.phrases.end());
    for (std::size_t k = 0; k < report.plotted.size(); ++k) {
      const auto& s = summaries[report.plotted[k]];
      if (s.group != Group::target || !wanted.count(s.phrase_id)) continue;
      ++subset.plotted;
      ++subset.counts[static_cast<std::size_t>(report.quadrants.labels[k])];
    }
    report.literal_subset = std::move(subset);
  }
  return report;
}

}  // namespace idiomspace::analysis
