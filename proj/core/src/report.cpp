#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "idiomspace/analysis.hpp"
#include "idiomspace/errors.hpp"
#include "idiomspace/version.hpp"

namespace idiomspace::analysis {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kTieRule = "a point equal to a threshold is placed on the high side";

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const GroupMeans& m) {
  return Json{{"n", m.n},
              {"conventionality", m.conventionality},
              {"contingency", m.contingency},
              {"head_conventionality", m.head_conventionality},
              {"dep_conventionality", m.dep_conventionality}};
}

Json to_json(const TTest& t) {
  return Json{{"t", number(t.t)}, {"df", number(t.df)}, {"p", t.p}};
}

Json outcome(const char* test, const Outcome<TTest>& o) {
  Json j{{"test", test}};
  if (o.result) {
    j.update(to_json(*o.result));
  } else {
    j["error"] = o.error;
  }
  return j;
}

Json counts_json(const std::array<std::size_t, 4>& counts) {
  Json j = Json::object();
  for (const auto q : kQuadrants) j[to_string(q)] = counts[static_cast<std::size_t>(q)];
  return j;
}

Json asymmetry_json(const Outcome<AsymmetryResult>& o) {
  Json j{{"test", "welch"}};
  if (!o.result) {
    j["error"] = o.error;
    return j;
  }
  const auto& a = *o.result;
  j["n"] = a.n;
  j["head_mean"] = a.head_mean;
  j["dep_mean"] = a.dep_mean;
  j.update(to_json(a.test));
  Json types = Json::array();
  for (const auto& t : a.by_type) {
    Json e{{"phrase_type", corpus::to_string(t.phrase_type)},
           {"n", t.n},
           {"head_mean", t.head_mean},
           {"dep_mean", t.dep_mean},
           {"phrase_mean", t.phrase_mean}};
    if (t.test) {
      e.update(to_json(*t.test));
    } else {
      e["error"] = t.error;
    }
    types.push_back(std::move(e));
  }
  j["by_type"] = std::move(types);
  return j;
}

std::string na(const std::optional<double>& v) { return v ? tables::format_double(*v) : "NA"; }

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  auto partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + partial.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + partial.string());
  }
  std::filesystem::rename(partial, path);
}

}  // namespace

std::string report_json(const AnalysisReport& r) {
  const auto& opt = r.options;
  Json j;
  j["tool"] = "idiomspace";
  j["version"] = kVersion;
  j["manifest"] = opt.manifest.empty() ? Json(nullptr) : Json(opt.manifest);
  j["units"] = {{"contingency", opt.bits ? "bits" : "nats"}};
  j["methods"] = {
      {"contingency_comparison", "paired t-test on per-phrase target minus matched mean contingency"},
      {"correlation", "Pearson r between phrase conventionality and mean contingency over plotted points"},
      {"asymmetry", "Welch t-test of head against dependent conventionality; binomials use the first conjunct as head"},
      {"ratings", "ordinary least squares of mean item rating on conventionality, substituting for a mixed-effects model"},
  };
  j["filter"] = {{"min_instances", opt.min_instances},
                 {"phrases_total", r.phrases_total},
                 {"phrases_included", r.phrases_included}};
  j["group_means"] = {{"target", to_json(r.target)}, {"matched", to_json(r.matched)}};

  Json cmp = outcome("paired", r.contingency_comparison);
  cmp["n"] = r.paired_n;
  cmp["mean_difference"] = r.mean_difference;
  j["contingency_comparison"] = std::move(cmp);

  Json corr{{"test", "pearson"}, {"n", r.plotted.size()}};
  if (r.correlation.result) {
    corr["r"] = r.correlation.result->r;
    corr["df"] = r.correlation.result->df;
    corr["p"] = r.correlation.result->p;
  } else {
    corr["error"] = r.correlation.error;
  }
  j["correlation"] = std::move(corr);

  Json assignments = Json::array();
  for (std::size_t k = 0; k < r.plotted.size(); ++k) {
    const auto& s = r.summaries[r.plotted[k]];
    assignments.push_back({{"phrase_id", s.phrase_id},
                           {"phrase_type", corpus::to_string(s.phrase_type)},
                           {"group", conventionality::to_string(s.group)},
                           {"conventionality", *s.phrase_conv},
                           {"contingency", *s.mean_contingency},
                           {"quadrant", to_string(r.quadrants.labels[k])}});
  }
  j["quadrants"] = {
      {"thresholds",
       {{"mode", opt.fixed_thresholds ? "value" : "mean"},
        {"conventionality", r.quadrants.conv_threshold},
        {"contingency", r.quadrants.cont_threshold}}},
      {"tie_rule", kTieRule},
      {"total", r.plotted.size()},
      {"counts", counts_json(r.quadrants.counts)},
      {"assignments", std::move(assignments)},
  };
  j["asymmetry"] = {{"target", asymmetry_json(r.asymmetry_target)},
                    {"matched", asymmetry_json(r.asymmetry_matched)}};

  if (opt.group_by_type) {
    Json types = Json::array();
    for (const auto& t : r.by_type) {
      types.push_back({{"phrase_type", corpus::to_string(t.phrase_type)},
                       {"target", to_json(t.target)},
                       {"matched", to_json(t.matched)},
                       {"contingency_comparison", outcome("paired", t.contingency_comparison)}});
    }
    j["by_type"] = std::move(types);
  }
  if (r.ratings) {
    Json rat{{"test", "ols"}};
    if (r.ratings->result) {
      const auto& res = *r.ratings->result;
      rat["items"] = res.items;
      rat["ratings"] = res.ratings;
      rat["slope"] = res.regression.slope;
      rat["intercept"] = res.regression.intercept;
      rat["slope_se"] = res.regression.slope_se;
      rat["t"] = number(res.regression.t);
      rat["df"] = res.regression.df;
      rat["p"] = res.regression.p;
    } else {
      rat["error"] = r.ratings->error;
    }
    j["ratings"] = std::move(rat);
  }
  if (r.literal_subset) {
    const auto& l = *r.literal_subset;
    j["literal_subset"] = {{"max_head_rating", l.max_rating},
                           {"phrases", l.phrases},
                           {"plotted", l.plotted},
                           {"counts", counts_json(l.counts)}};
  }
  return j.dump(2) + "\n";
}

std::string summaries_tsv(const AnalysisReport& r) {
  std::ostringstream out;
  if (!r.options.manifest.empty()) out << "# manifest: " << r.options.manifest << '\n';
  out << "phrase_id\tphrase_type\tgroup\ttarget_instances\tmatched_instances\tmean_contingency"
         "\thead_conv\tdep_conv\tphrase_conv\tincluded\tquadrant\n";
  for (std::size_t i = 0; i < r.summaries.size(); ++i) {
    const auto& s = r.summaries[i];
    const auto q = r.quadrant_of(i);
    out << s.phrase_id << '\t' << corpus::to_string(s.phrase_type) << '\t'
        << conventionality::to_string(s.group) << '\t' << s.target_instances << '\t'
        << s.matched_instances << '\t' << na(s.mean_contingency) << '\t' << na(s.head_conv) << '\t'
        << na(s.dep_conv) << '\t' << na(s.phrase_conv) << '\t' << (s.included ? "true" : "false")
        << '\t' << (q ? to_string(*q) : "NA") << '\n';
  }
  return out.str();
}

std::string scatter_svg(const AnalysisReport& r) {
  constexpr double kWidth = 720.0;
  constexpr double kHeight = 540.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 160.0;
  constexpr double kTop = 30.0;
  constexpr double kBottom = 60.0;

  double x_lo = r.quadrants.conv_threshold;
  double x_hi = x_lo;
  double y_lo = r.quadrants.cont_threshold;
  double y_hi = y_lo;
  for (const auto i : r.plotted) {
    const auto& s = r.summaries[i];
    x_lo = std::min(x_lo, *s.phrase_conv);
    x_hi = std::max(x_hi, *s.phrase_conv);
    y_lo = std::min(y_lo, *s.mean_contingency);
    y_hi = std::max(y_hi, *s.mean_contingency);
  }
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo > 0.0 ? hi - lo : 1.0;
    lo -= 0.05 * span;
    hi += 0.05 * span;
  };
  pad(x_lo, x_hi);
  pad(y_lo, y_hi);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double v) { return kTop + (y_hi - v) / (y_hi - y_lo) * plot_h; };
  const char* unit = r.options.bits ? "bits" : "nats";

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\""
      << " data-plot-left=\"" << kLeft << "\" data-plot-top=\"" << kTop << "\" data-plot-width=\""
      << plot_w << "\" data-plot-height=\"" << plot_h << "\" data-x-min=\""
      << tables::format_double(x_lo) << "\" data-x-max=\"" << tables::format_double(x_hi)
      << "\" data-y-min=\"" << tables::format_double(y_lo) << "\" data-y-max=\""
      << tables::format_double(y_hi) << "\">\n";
  if (!r.options.manifest.empty()) out << "<!-- manifest: " << r.options.manifest << " -->\n";
  out << "<style>text{font-family:sans-serif;font-size:12px}"
         ".target{fill:#c0392b}.matched{fill:#2471a3}"
         ".average{stroke:#000;stroke-width:1.5}"
         ".threshold{stroke:#555;stroke-dasharray:6 4}</style>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#000\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 4.0;
    out << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << fixed(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << fixed(xv) << "</text>\n";
    out << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(sy(yv) + 4)
        << "\" text-anchor=\"end\">" << fixed(yv) << "</text>\n";
  }
  out << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 15)
      << "\" text-anchor=\"middle\">conventionality</text>\n";
  out << "<text transform=\"translate(18 " << fixed(kTop + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">contingency (" << unit << ")</text>\n";

  out << "<line id=\"threshold-conv\" class=\"threshold\" data-value=\""
      << tables::format_double(r.quadrants.conv_threshold) << "\" x1=\""
      << fixed(sx(r.quadrants.conv_threshold)) << "\" y1=\"" << fixed(kTop) << "\" x2=\""
      << fixed(sx(r.quadrants.conv_threshold)) << "\" y2=\"" << fixed(kTop + plot_h) << "\"/>\n";
  out << "<line id=\"threshold-cont\" class=\"threshold\" data-value=\""
      << tables::format_double(r.quadrants.cont_threshold) << "\" x1=\"" << fixed(kLeft)
      << "\" y1=\"" << fixed(sy(r.quadrants.cont_threshold)) << "\" x2=\"" << fixed(kLeft + plot_w)
      << "\" y2=\"" << fixed(sy(r.quadrants.cont_threshold)) << "\"/>\n";

  for (const auto i : r.plotted) {
    const auto& s = r.summaries[i];
    const char* g = conventionality::to_string(s.group);
    out << "<circle class=\"point " << g << "\" cx=\"" << fixed(sx(*s.phrase_conv)) << "\" cy=\""
        << fixed(sy(*s.mean_contingency)) << "\" r=\"3\" fill-opacity=\"0.7\"><title>"
        << escape_xml(s.phrase_id) << " (" << g << ")</title></circle>\n";
  }
  for (const auto& [group, means] :
       {std::pair{Group::target, r.target}, std::pair{Group::matched, r.matched}}) {
    if (means.n == 0) continue;
    const char* g = conventionality::to_string(group);
    out << "<circle class=\"average " << g << "\" data-conv=\""
        << tables::format_double(means.conventionality) << "\" data-cont=\""
        << tables::format_double(means.contingency) << "\" cx=\"" << fixed(sx(means.conventionality))
        << "\" cy=\"" << fixed(sy(means.contingency)) << "\" r=\"9\"><title>" << g
        << " average</title></circle>\n";
  }

  const double lx = kLeft + plot_w + 20;
  out << "<circle class=\"target\" cx=\"" << fixed(lx) << "\" cy=\"" << fixed(kTop + 10)
      << "\" r=\"5\"/><text x=\"" << fixed(lx + 12) << "\" y=\"" << fixed(kTop + 14)
      << "\">target</text>\n";
  out << "<circle class=\"matched\" cx=\"" << fixed(lx) << "\" cy=\"" << fixed(kTop + 30)
      << "\" r=\"5\"/><text x=\"" << fixed(lx + 12) << "\" y=\"" << fixed(kTop + 34)
      << "\">matched</text>\n";
  out << "<text x=\"" << fixed(lx - 5) << "\" y=\"" << fixed(kTop + 58)
      << "\">large points: averages</text>\n";
  out << "</svg>\n";
  return out.str();
}

void write_report(const AnalysisReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_atomically(dir / "report.json", report_json(report));
  write_atomically(dir / "summaries.tsv", summaries_tsv(report));
  write_atomically(dir / "scatter.svg", scatter_svg(report));
}

}  // namespace idiomspace::analysis
