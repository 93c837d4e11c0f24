#include "stages.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "idiomspace/contingency.hpp"
#include "idiomspace/digest.hpp"
#include "idiomspace/errors.hpp"
#include "worker_pool.hpp"

namespace idiomspace::cli {

namespace {

int g_verbosity = 1;
std::mutex g_log_mutex;

void log_line(const std::string& stage, const std::string& message) {
  std::lock_guard lock(g_log_mutex);
  std::cerr << "[" << stage << "] " << message << '\n';
}

template <class Row>
void write_partial(const fs::path& path, const std::vector<std::optional<std::vector<Row>>>& done,
                   void (*writer)(std::ostream&, const std::vector<Row>&, const std::string&)) {
  if (path.empty()) return;
  std::vector<Row> rows;
  for (const auto& unit : done) {
    if (!unit) break;
    rows.insert(rows.end(), unit->begin(), unit->end());
  }
  std::ofstream out(path);
  writer(out, rows, {});
}

template <class Row>
std::vector<Row> flatten(std::vector<std::optional<std::vector<Row>>> done) {
  std::vector<Row> rows;
  for (auto& unit : done) rows.insert(rows.end(), unit->begin(), unit->end());
  return rows;
}

}  // namespace

void set_verbosity(int level) { g_verbosity = level; }

void log_info(const std::string& stage, const std::string& message) {
  if (g_verbosity >= 1) log_line(stage, message);
}

void log_debug(const std::string& stage, const std::string& message) {
  if (g_verbosity >= 2) log_line(stage, message);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + partial.string());
    body(out);
    if (!out) throw ConfigError("write failed for " + partial.string());
  }
  fs::rename(partial, path);
}

Inputs load_inputs(const fs::path& corpus_path, const fs::path& phrases_path) {
  if (!fs::exists(corpus_path)) throw ConfigError("corpus file not found: " + corpus_path.string());
  Inputs in;
  in.corpus_path = corpus_path;
  in.phrases_path = phrases_path;
  in.corpus = corpus::read_treebank(corpus_path);
  in.phrases = load_phrases(phrases_path);
  return in;
}

std::vector<corpus::PhraseSpec> load_phrases(const fs::path& phrases_path) {
  if (!fs::exists(phrases_path)) {
    throw ConfigError("phrase list not found: " + phrases_path.string());
  }
  return corpus::read_phrase_list(phrases_path);
}

std::vector<tables::InstanceRow> extract_stage(const Inputs& inputs, std::size_t jobs) {
  auto done = parallel_map<std::vector<tables::InstanceRow>>(
      inputs.phrases.size(), jobs, [&](std::size_t i) {
        const auto sets = treequery::extract_all(inputs.corpus, treequery::PhrasePattern(inputs.phrases[i]));
        std::vector<tables::InstanceRow> rows;
        for (const auto* set : {&sets.target, &sets.head_matched, &sets.dep_matched}) {
          for (const auto& inst : *set) rows.push_back(tables::instance_row(inputs.corpus, inst));
        }
        log_debug("extract", inputs.phrases[i].phrase_id + ": " + std::to_string(sets.target.size()) +
                                 " target, " + std::to_string(sets.head_matched.size()) +
                                 " head-matched, " + std::to_string(sets.dep_matched.size()) +
                                 " dep-matched");
        return rows;
      });
  return flatten(std::move(done));
}

InstanceMap resolve_instances(const Inputs& inputs, const std::vector<tables::InstanceRow>& rows) {
  InstanceMap out;
  for (const auto& p : inputs.phrases) out[p.phrase_id];
  for (const auto& r : rows) {
    const auto it = out.find(r.phrase_id);
    if (it == out.end()) throw ValidationError("instance table names unknown phrase '" + r.phrase_id + "'");
    const auto record = inputs.corpus.find(r.doc_id, r.sent_index);
    if (!record) {
      throw ValidationError("instance table names unknown sentence " + r.doc_id + ":" +
                            std::to_string(r.sent_index));
    }
    const auto n = inputs.corpus.at(*record).tokens.size();
    const bool ok = r.span_start < r.span_end && r.span_end < n && r.head_index >= r.span_start &&
                    r.head_index <= r.span_end && r.dep_index >= r.span_start &&
                    r.dep_index <= r.span_end && r.head_index != r.dep_index;
    if (!ok) {
      throw ValidationError("instance of " + r.phrase_id + " in " + r.doc_id + ":" +
                            std::to_string(r.sent_index) + " has inconsistent token indices");
    }
    corpus::PhraseInstance inst{r.phrase_id, *record,     r.span_start,   r.span_end,
                                r.head_index, r.dep_index, r.match_class};
    auto& sets = it->second;
    switch (r.match_class) {
      case corpus::MatchClass::target: sets.target.push_back(inst); break;
      case corpus::MatchClass::head_matched: sets.head_matched.push_back(inst); break;
      case corpus::MatchClass::dep_matched: sets.dep_matched.push_back(inst); break;
    }
  }
  return out;
}

InstanceMap instances_for(const Inputs& inputs, const std::optional<fs::path>& path,
                          std::size_t jobs) {
  if (!path) return resolve_instances(inputs, extract_stage(inputs, jobs));
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open " + path->string());
  return resolve_instances(inputs, tables::read_instances(in));
}

std::vector<tables::ConvRow> conv_stage(const Inputs& inputs, const InstanceMap& instances,
                                        providers::Provider& provider,
                                        const ConvSettings& settings, const fs::path& partial) {
  using conventionality::Group;
  const std::string fingerprint = provider.handshake().provenance();
  constexpr std::pair<Group, corpus::Slot> kUnits[] = {{Group::target, corpus::Slot::head},
                                                       {Group::target, corpus::Slot::dep},
                                                       {Group::matched, corpus::Slot::head},
                                                       {Group::matched, corpus::Slot::dep}};
  std::exception_ptr failure;
  auto done = parallel_map<std::vector<tables::ConvRow>>(
      4 * inputs.phrases.size(), settings.jobs,
      [&](std::size_t i) {
        const auto& spec = inputs.phrases[i / 4];
        const auto [group, slot] = kUnits[i % 4];
        const auto score = conventionality::score_phrase_slot(
            inputs.corpus, spec, instances.at(spec.phrase_id), slot, group, provider, settings.score);
        if (score.flagged) {
          log_info("score-conv", spec.phrase_id + " " + corpus::to_string(slot) + " (" +
                                     conventionality::to_string(group) + ") flagged: " +
                                     score.flag_reason);
        }
        tables::ConvRow row;
        row.phrase_id = spec.phrase_id;
        row.slot = slot;
        row.group = group;
        row.n = score.n;
        row.m = score.m;
        row.flagged = score.flagged;
        if (!score.flagged) row.value = score.value;
        row.provider_fingerprint = fingerprint;
        return std::vector<tables::ConvRow>{row};
      },
      &failure);
  if (failure) {
    write_partial<tables::ConvRow>(partial, done, &tables::write_conv);
    std::rethrow_exception(failure);
  }
  return flatten(std::move(done));
}

std::vector<tables::ContRow> cont_stage(const Inputs& inputs, const InstanceMap& instances,
                                        providers::Provider& provider,
                                        const ContSettings& settings, const fs::path& partial) {
  const std::string fingerprint = provider.handshake().provenance();
  std::vector<const corpus::PhraseInstance*> units;
  for (const auto& spec : inputs.phrases) {
    const auto& sets = instances.at(spec.phrase_id);
    for (const auto* set : {&sets.target, &sets.head_matched, &sets.dep_matched}) {
      for (const auto& inst : *set) units.push_back(&inst);
    }
  }
  std::exception_ptr failure;
  auto done = parallel_map<std::vector<tables::ContRow>>(
      units.size(), settings.jobs,
      [&](std::size_t i) {
        const auto& inst = *units[i];
        const auto score =
            contingency::instance_contingency(provider, inputs.corpus, inst, settings.padding);
        const auto& rec = inputs.corpus.at(inst.record);
        return std::vector<tables::ContRow>{{inst.phrase_id, inst.match_class, rec.doc_id,
                                             rec.sent_index, score.value, score.joint_logprob,
                                             score.n_span_words(), fingerprint}};
      },
      &failure);
  if (failure) {
    write_partial<tables::ContRow>(partial, done, &tables::write_cont);
    std::rethrow_exception(failure);
  }
  return flatten(std::move(done));
}

std::optional<std::pair<double, double>> parse_thresholds(const std::string& text) {
  if (text == "mean") return std::nullopt;
  const std::string prefix = "value:";
  const auto comma = text.find(',');
  if (text.rfind(prefix, 0) != 0 || comma == std::string::npos) {
    throw ConfigError("--thresholds expects 'mean' or 'value:<conv>,<cont>', got '" + text + "'");
  }
  try {
    std::size_t used = 0;
    const std::string a = text.substr(prefix.size(), comma - prefix.size());
    const std::string b = text.substr(comma + 1);
    const double conv = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    const double cont = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    return std::pair{conv, cont};
  } catch (const std::logic_error&) {
    throw ConfigError("--thresholds value is not numeric: '" + text + "'");
  }
}

analysis::AnalysisReport analyze_stage(const std::vector<corpus::PhraseSpec>& phrases,
                                       const std::vector<tables::ConvRow>& conv,
                                       const std::vector<tables::ContRow>& cont,
                                       const AnalyzeSettings& settings, const fs::path& out_dir) {
  std::vector<analysis::RatingRecord> ratings;
  if (settings.ratings) ratings = analysis::read_ratings(*settings.ratings);

  if (settings.sweep_max) {
    std::ostringstream table;
    table << "min_instances\tphrases_included\tplotted_points\tstatus\n";
    for (std::size_t n = 10; n <= *settings.sweep_max; n += 10) {
      auto options = settings.report;
      options.min_instances = n;
      try {
        const auto r = analysis::build_report(phrases, conv, cont, ratings, options);
        analysis::write_report(r, out_dir / "sweep" / ("min_" + std::to_string(n)));
        table << n << '\t' << r.phrases_included << '\t' << r.plotted.size() << "\tok\n";
      } catch (const InsufficientDataError&) {
        table << n << "\t0\t0\tempty\n";
      }
    }
    write_file(out_dir / "sweep" / "sweep.tsv", [&](std::ostream& out) { out << table.str(); });
  }

  auto report = analysis::build_report(phrases, conv, cont, ratings, settings.report);
  analysis::write_report(report, out_dir);
  return report;
}

std::vector<std::string> load_padding(const std::optional<fs::path>& path) {
  if (!path) return contingency::padding_tokens(contingency::default_padding());
  return contingency::padding_tokens(read_file(*path));
}

}  // namespace idiomspace::cli
