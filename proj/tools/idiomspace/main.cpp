// idiomspace: extract phrase instances from a treebank, score them for
// conventionality and contingency through a provider, and analyze the scores.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "idiomspace/contingency.hpp"
#include "idiomspace/digest.hpp"
#include "idiomspace/errors.hpp"
#include "idiomspace/oracle_lm.hpp"
#include "idiomspace/providers.hpp"
#include "idiomspace/version.hpp"
#include "stages.hpp"

namespace {

using namespace idiomspace;
using cli::fs::path;
using Json = nlohmann::ordered_json;

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kProvider = 4, kAnalysis = 5 };

std::string g_stage = "idiomspace";

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return kConfig;
    case ErrorKind::data: return kData;
    case ErrorKind::provider: return kProvider;
    case ErrorKind::analysis: return kAnalysis;
    case ErrorKind::contract: return kInternal;
  }
  return kInternal;
}

struct ProviderFlags {
  std::string descriptor;
  std::size_t window = 3;

  std::unique_ptr<providers::Provider> open() const {
    const auto d = providers::parse_descriptor(descriptor);
    providers::ProviderOptions options;
    options.embed_window = window;
    return providers::open_provider(d, options);
  }
};

struct InputFlags {
  std::string corpus;
  std::string phrases;
};

struct ScoreFlags {
  std::string instances;
  std::size_t min_occurrences = conventionality::kDefaultMinOccurrences;
  std::string padding;
};

struct AnalyzeFlags {
  std::size_t min_instances = analysis::kDefaultMinInstances;
  std::string thresholds = "mean";
  std::string group_by;
  std::string ratings;
  bool bits = false;
  std::optional<double> literal_max;
  std::optional<std::size_t> sweep_max;
};

struct Common {
  std::string out_dir = ".";
  std::size_t jobs = 1;
};

void add_inputs(CLI::App* cmd, InputFlags& f, bool phrases_only = false) {
  if (!phrases_only) {
    cmd->add_option("--corpus", f.corpus, "Treebank file (#doc headers, one bracketed tree per line)")
        ->required();
  }
  cmd->add_option("--phrases", f.phrases, "Phrase list TSV")->required();
}

void add_provider(CLI::App* cmd, ProviderFlags& f) {
  cmd->add_option("--provider", f.descriptor,
                  "toy:<model file> | subprocess:<command> | socket:<path>")
      ->required();
  cmd->add_option("--window", f.window, "Context window of the toy provider's embeddings")
      ->capture_default_str();
}

void add_analyze(CLI::App* cmd, AnalyzeFlags& f) {
  cmd->add_option("--min-instances", f.min_instances,
                  "Minimum target and matched instances per phrase")
      ->capture_default_str();
  cmd->add_option("--thresholds", f.thresholds, "mean | value:<conv>,<cont>")->capture_default_str();
  cmd->add_option("--group-by", f.group_by, "Add a per-group breakdown")
      ->check(CLI::IsMember({"phrase_type"}));
  cmd->add_option("--ratings", f.ratings,
                  "Literalness ratings TSV (participant, item, phrase_id, element, rating)");
  cmd->add_flag("--bits", f.bits, "Report contingency in bits instead of nats");
  cmd->add_option("--literal-max", f.literal_max,
                  "Report the quadrant split of phrases whose mean head rating is at most this");
  cmd->add_option("--sweep", f.sweep_max,
                  "Also emit one report per filter threshold 10, 20, ... up to this value");
}

Json file_entry(const std::string& p) {
  return Json{{"path", p}, {"sha256", sha256_file(p)}};
}

Json provider_entry(const ProviderFlags& flags, const providers::Handshake& h) {
  Json j{{"descriptor", flags.descriptor},
         {"window", flags.window},
         {"name", h.provider_name},
         {"fingerprint", h.config_fingerprint},
         {"dimension", h.dimension}};
  const auto d = providers::parse_descriptor(flags.descriptor);
  if (d.kind == providers::ProviderDescriptor::Kind::toy) j["model_sha256"] = sha256_file(d.argument);
  return j;
}

Json padding_entry(const ScoreFlags& f) {
  if (f.padding.empty()) {
    return Json{{"path", nullptr},
                {"sha256", sha256_hex(contingency::default_padding())}};
  }
  return file_entry(f.padding);
}

Json analyze_entry(const AnalyzeFlags& f) {
  Json j{{"min_instances", f.min_instances},
         {"thresholds", f.thresholds},
         {"group_by", f.group_by.empty() ? Json(nullptr) : Json(f.group_by)},
         {"units", f.bits ? "bits" : "nats"},
         {"literal_max", f.literal_max ? Json(*f.literal_max) : Json(nullptr)},
         {"sweep_max", f.sweep_max ? Json(*f.sweep_max) : Json(nullptr)}};
  j["ratings"] = f.ratings.empty() ? Json(nullptr) : file_entry(f.ratings);
  return j;
}

// Writes the manifest and returns the reference stamped into artifacts.
std::string write_manifest(const path& dir, const std::string& name, const Json& body) {
  Json doc{{"tool", "idiomspace"}, {"version", kVersion}};
  doc.update(body);
  const std::string text = doc.dump(2) + "\n";
  cli::write_file(dir / name, [&](std::ostream& out) { out << text; });
  return name + "@" + sha256_hex(text).substr(0, 16);
}

cli::AnalyzeSettings analyze_settings(const AnalyzeFlags& f, const std::string& manifest) {
  cli::AnalyzeSettings s;
  s.report.min_instances = f.min_instances;
  s.report.fixed_thresholds = cli::parse_thresholds(f.thresholds);
  s.report.group_by_type = f.group_by == "phrase_type";
  s.report.bits = f.bits;
  s.report.literal_max_rating = f.literal_max;
  s.report.manifest = manifest;
  if (!f.ratings.empty()) s.ratings = path(f.ratings);
  if (f.literal_max && f.ratings.empty()) throw ConfigError("--literal-max needs --ratings");
  s.sweep_max = f.sweep_max;
  return s;
}

std::optional<path> optional_path(const std::string& p) {
  if (p.empty()) return std::nullopt;
  return path(p);
}

void write_instances(const path& file, const std::vector<tables::InstanceRow>& rows,
                     const std::string& manifest) {
  cli::write_file(file, [&](std::ostream& out) { tables::write_instances(out, rows, manifest); });
}

// ---------------------------------------------------------------------------

int cmd_extract(const InputFlags& in, const Common& c) {
  g_stage = "extract";
  const auto inputs = cli::load_inputs(in.corpus, in.phrases);
  const path dir = c.out_dir;
  const auto manifest = write_manifest(
      dir, "manifest.extract.json",
      Json{{"command", "extract"},
           {"inputs", {{"corpus", file_entry(in.corpus)}, {"phrases", file_entry(in.phrases)}}}});
  const auto rows = cli::extract_stage(inputs, c.jobs);
  write_instances(dir / "instances.tsv", rows, manifest);
  cli::log_info(g_stage, std::to_string(rows.size()) + " instances of " +
                             std::to_string(inputs.phrases.size()) + " phrases");
  return kOk;
}

int cmd_score_conv(const InputFlags& in, const ProviderFlags& pf, const ScoreFlags& sf,
                   const Common& c) {
  g_stage = "score-conv";
  const auto inputs = cli::load_inputs(in.corpus, in.phrases);
  const auto instances = cli::instances_for(inputs, optional_path(sf.instances), c.jobs);
  const auto provider = pf.open();
  const path dir = c.out_dir;
  const auto manifest = write_manifest(
      dir, "manifest.score-conv.json",
      Json{{"command", "score-conv"},
           {"inputs",
            {{"corpus", file_entry(in.corpus)},
             {"phrases", file_entry(in.phrases)},
             {"instances", sf.instances.empty() ? Json(nullptr) : file_entry(sf.instances)}}},
           {"provider", provider_entry(pf, provider->handshake())},
           {"min_occurrences", sf.min_occurrences}});
  cli::ConvSettings settings;
  settings.score.min_occurrences = sf.min_occurrences;
  settings.jobs = c.jobs;
  const auto rows = cli::conv_stage(inputs, instances, *provider, settings, dir / "conv.tsv.partial");
  cli::write_file(dir / "conv.tsv", [&](std::ostream& out) { tables::write_conv(out, rows, manifest); });
  return kOk;
}

int cmd_score_cont(const InputFlags& in, const ProviderFlags& pf, const ScoreFlags& sf,
                   const Common& c) {
  g_stage = "score-cont";
  const auto inputs = cli::load_inputs(in.corpus, in.phrases);
  const auto instances = cli::instances_for(inputs, optional_path(sf.instances), c.jobs);
  const auto provider = pf.open();
  const path dir = c.out_dir;
  const auto manifest = write_manifest(
      dir, "manifest.score-cont.json",
      Json{{"command", "score-cont"},
           {"inputs",
            {{"corpus", file_entry(in.corpus)},
             {"phrases", file_entry(in.phrases)},
             {"instances", sf.instances.empty() ? Json(nullptr) : file_entry(sf.instances)},
             {"padding", padding_entry(sf)}}},
           {"provider", provider_entry(pf, provider->handshake())}});
  cli::ContSettings settings;
  settings.padding = cli::load_padding(optional_path(sf.padding));
  settings.jobs = c.jobs;
  const auto rows = cli::cont_stage(inputs, instances, *provider, settings, dir / "cont.tsv.partial");
  cli::write_file(dir / "cont.tsv", [&](std::ostream& out) { tables::write_cont(out, rows, manifest); });
  return kOk;
}

int cmd_analyze(const InputFlags& in, const std::string& conv, const std::string& cont,
                const AnalyzeFlags& af, const Common& c) {
  g_stage = "analyze";
  const path dir = c.out_dir;
  const path conv_path = conv.empty() ? dir / "conv.tsv" : path(conv);
  const path cont_path = cont.empty() ? dir / "cont.tsv" : path(cont);
  const auto phrases = cli::load_phrases(in.phrases);
  const auto conv_rows = tables::read_conv(conv_path);
  const auto cont_rows = tables::read_cont(cont_path);
  const auto manifest = write_manifest(
      dir, "manifest.analyze.json",
      Json{{"command", "analyze"},
           {"inputs",
            {{"phrases", file_entry(in.phrases)},
             {"conv", file_entry(conv_path.string())},
             {"cont", file_entry(cont_path.string())}}},
           {"analysis", analyze_entry(af)}});
  const auto report = cli::analyze_stage(phrases, conv_rows, cont_rows, analyze_settings(af, manifest), dir);
  cli::log_info(g_stage, std::to_string(report.phrases_included) + " of " +
                             std::to_string(report.phrases_total) + " phrases included, " +
                             std::to_string(report.plotted.size()) + " points plotted");
  return kOk;
}

int cmd_run(const InputFlags& in, const ProviderFlags& pf, const ScoreFlags& sf,
            const AnalyzeFlags& af, std::uint64_t seed, const Common& c) {
  g_stage = "run";
  const path dir = c.out_dir;
  const auto settings = analyze_settings(af, "");
  const auto inputs = cli::load_inputs(in.corpus, in.phrases);
  const auto provider = pf.open();
  const auto manifest = write_manifest(
      dir, "manifest.json",
      Json{{"command", "run"},
           {"inputs",
            {{"corpus", file_entry(in.corpus)},
             {"phrases", file_entry(in.phrases)},
             {"padding", padding_entry(sf)}}},
           {"provider", provider_entry(pf, provider->handshake())},
           {"conventionality", {{"min_occurrences", sf.min_occurrences}}},
           {"analysis", analyze_entry(af)},
           {"seed", seed},
           {"artifacts",
            {"instances.tsv", "conv.tsv", "cont.tsv", "report.json", "summaries.tsv",
             "scatter.svg"}}});

  g_stage = "extract";
  const auto instance_rows = cli::extract_stage(inputs, c.jobs);
  write_instances(dir / "instances.tsv", instance_rows, manifest);
  const auto instances = cli::resolve_instances(inputs, instance_rows);
  cli::log_info(g_stage, std::to_string(instance_rows.size()) + " instances of " +
                             std::to_string(inputs.phrases.size()) + " phrases");

  g_stage = "score-conv";
  cli::ConvSettings conv_settings;
  conv_settings.score.min_occurrences = sf.min_occurrences;
  conv_settings.jobs = c.jobs;
  const auto conv = cli::conv_stage(inputs, instances, *provider, conv_settings, dir / "conv.tsv.partial");
  cli::write_file(dir / "conv.tsv", [&](std::ostream& out) { tables::write_conv(out, conv, manifest); });
  cli::log_info(g_stage, std::to_string(conv.size()) + " slot scores");

  g_stage = "score-cont";
  cli::ContSettings cont_settings;
  cont_settings.padding = cli::load_padding(optional_path(sf.padding));
  cont_settings.jobs = c.jobs;
  const auto cont = cli::cont_stage(inputs, instances, *provider, cont_settings, dir / "cont.tsv.partial");
  cli::write_file(dir / "cont.tsv", [&](std::ostream& out) { tables::write_cont(out, cont, manifest); });
  cli::log_info(g_stage, std::to_string(cont.size()) + " instance scores");

  g_stage = "analyze";
  auto full = settings;
  full.report.manifest = manifest;
  const auto report = cli::analyze_stage(inputs.phrases, conv, cont, full, dir);
  cli::log_info(g_stage, std::to_string(report.phrases_included) + " of " +
                             std::to_string(report.phrases_total) + " phrases included, " +
                             std::to_string(report.plotted.size()) + " points plotted");
  return kOk;
}

int cmd_provider_check(const ProviderFlags& pf, const std::string& sentence) {
  g_stage = "provider-check";
  const auto provider = pf.open();
  int failures = 0;
  auto report = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "ok   " : "FAIL ") << what << '\n';
    if (!ok) ++failures;
  };

  const auto h = provider->handshake();
  report(h.dimension > 0 && !h.provider_name.empty() && !h.config_fingerprint.empty(),
         "handshake: " + h.provider_name + " fingerprint=" + h.config_fingerprint +
             " dimension=" + std::to_string(h.dimension));

  const auto tokens = contingency::padding_tokens(sentence);
  if (tokens.size() < 3) throw ConfigError("--sentence needs at least three words");
  const std::size_t target = tokens.size() / 2;

  const auto e1 = providers::request_embedding(*provider, tokens, target);
  const auto e2 = providers::request_embedding(*provider, tokens, target);
  report(e1.dimension() == h.dimension, "embed dimension " + std::to_string(e1.dimension()));
  report(e1.components == e2.components, "embed repeated request is identical");

  std::vector<bool> mask(tokens.size(), false);
  mask[target + 1 < tokens.size() ? target + 1 : 0] = true;
  const double lp1 = providers::request_condprob(*provider, tokens, mask, target);
  const double lp2 = providers::request_condprob(*provider, tokens, mask, target);
  report(lp1 <= 0.0, "condprob logprob " + tables::format_double(lp1) + " <= 0");
  report(lp1 == lp2, "condprob repeated request is identical");

  std::vector<providers::ProbeRequest> batch;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    batch.push_back(providers::make_embed_request(tokens, i));
    batch.back().id = i + 1;
  }
  const auto all = providers::request_embeddings(*provider, batch);
  const bool stable = std::all_of(all.begin(), all.end(),
                                  [&](const auto& v) { return v.dimension() == h.dimension; });
  report(stable, "dimension stable over " + std::to_string(all.size()) + " pipelined probes");

  if (failures > 0) {
    std::cerr << "provider-check: " << failures << " check(s) failed\n";
    return kProvider;
  }
  return kOk;
}

int cmd_serve(const ProviderFlags& pf, const std::string& listen, std::size_t max_connections) {
  g_stage = "serve";
  const auto provider = pf.open();
  if (!listen.empty()) {
    cli::log_info(g_stage, "listening on " + listen);
    providers::serve_unix_socket(*provider, listen, max_connections);
    return kOk;
  }
  auto transport = providers::fd_transport(0, 1);
  providers::serve(*provider, *transport);
  return kOk;
}

int cmd_fit_toy(const std::string& corpus_path, const std::string& out,
                const oracle_lm::EstimateOptions& options) {
  g_stage = "fit-toy";
  if (!cli::fs::exists(corpus_path)) throw ConfigError("corpus file not found: " + corpus_path);
  const auto corpus = corpus::read_treebank(corpus_path);
  const auto model = oracle_lm::estimate(corpus, options);
  cli::write_file(out, [&](std::ostream& o) {
    o << "# toy Markov model estimated from " << path(corpus_path).filename().string() << '\n'
      << model.serialize();
  });
  cli::log_info(g_stage, "vocabulary " + std::to_string(model.size()) + " written to " + out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score multiword phrases for conventionality and contingency", "idiomspace"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log per-phrase progress");
  app.add_flag("-q,--quiet", quiet, "Only log errors");
  app.set_config("--config", "", "TOML file with option values under a [run] section");
  app.fallthrough();

  Common common;
  auto add_common = [&](CLI::App* cmd, bool jobs = true) {
    cmd->add_option("--out-dir", common.out_dir, "Directory for artifacts")->capture_default_str();
    if (jobs) {
      cmd->add_option("-j,--jobs", common.jobs, "Worker threads")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
    }
  };

  InputFlags inputs;
  ProviderFlags provider;
  ScoreFlags score;
  AnalyzeFlags analyze;

  auto* extract = app.add_subcommand("extract", "Extract target and matched phrase instances");
  add_inputs(extract, inputs);
  add_common(extract);

  auto* conv = app.add_subcommand("score-conv", "Score head and dep conventionality");
  add_inputs(conv, inputs);
  add_provider(conv, provider);
  conv->add_option("--instances", score.instances, "Instance table from extract (default: re-extract)");
  conv->add_option("--min-occurrences", score.min_occurrences,
                   "Occurrences outside the phrase needed for a score")
      ->capture_default_str();
  add_common(conv);

  auto* cont = app.add_subcommand("score-cont", "Score instance contingency");
  add_inputs(cont, inputs);
  add_provider(cont, provider);
  cont->add_option("--instances", score.instances, "Instance table from extract (default: re-extract)");
  cont->add_option("--padding", score.padding, "Padding paragraph (default: built-in)");
  add_common(cont);

  std::string conv_table;
  std::string cont_table;
  auto* an = app.add_subcommand("analyze", "Summaries, tests, quadrants and plots");
  add_inputs(an, inputs, true);
  an->add_option("--conv", conv_table, "Conventionality table (default: <out-dir>/conv.tsv)");
  an->add_option("--cont", cont_table, "Contingency table (default: <out-dir>/cont.tsv)");
  add_analyze(an, analyze);
  add_common(an, false);

  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "extract, score-conv, score-cont and analyze in one go");
  add_inputs(run, inputs);
  add_provider(run, provider);
  run->add_option("--min-occurrences", score.min_occurrences,
                  "Occurrences outside the phrase needed for a score")
      ->capture_default_str();
  run->add_option("--padding", score.padding, "Padding paragraph (default: built-in)");
  add_analyze(run, analyze);
  run->add_option("--seed", seed, "Recorded in the manifest; the pipeline itself is deterministic")
      ->capture_default_str();
  add_common(run);

  std::string sentence =
      "the committee will review the new proposal before the meeting next week";
  auto* check = app.add_subcommand("provider-check", "Handshake and smoke probes against a provider");
  add_provider(check, provider);
  check->add_option("--sentence", sentence, "Probe sentence")->capture_default_str();

  std::string listen;
  std::size_t max_connections = 0;
  auto* serve = app.add_subcommand("serve", "Serve a provider over the wire protocol");
  add_provider(serve, provider);
  serve->add_option("--listen", listen, "Unix socket path (default: stdin/stdout)");
  serve->add_option("--max-connections", max_connections, "Stop after this many clients (0: never)");

  std::string fit_corpus;
  std::string fit_out;
  oracle_lm::EstimateOptions fit_options;
  auto* fit = app.add_subcommand("fit-toy", "Estimate a toy Markov model from a treebank");
  fit->add_option("--corpus", fit_corpus, "Treebank file")->required();
  fit->add_option("--out", fit_out, "Model file to write")->required();
  fit->add_option("--min-count", fit_options.min_count, "Rarer words become <unk>")->capture_default_str();
  fit->add_option("--max-vocabulary", fit_options.max_vocabulary, "Vocabulary cap")->capture_default_str();
  fit->add_option("--smoothing", fit_options.smoothing, "Add-k constant")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  cli::set_verbosity(quiet ? 0 : verbose ? 2 : 1);

  try {
    if (*extract) return cmd_extract(inputs, common);
    if (*conv) return cmd_score_conv(inputs, provider, score, common);
    if (*cont) return cmd_score_cont(inputs, provider, score, common);
    if (*an) return cmd_analyze(inputs, conv_table, cont_table, analyze, common);
    if (*run) return cmd_run(inputs, provider, score, analyze, seed, common);
    if (*check) return cmd_provider_check(provider, sentence);
    if (*serve) return cmd_serve(provider, listen, max_connections);
    if (*fit) return cmd_fit_toy(fit_corpus, fit_out, fit_options);
  } catch (const Error& e) {
    std::cerr << "idiomspace: [" << g_stage << "] " << to_string(e.kind()) << " error: " << e.what()
              << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "idiomspace: [" << g_stage << "] config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "idiomspace: [" << g_stage << "] internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
