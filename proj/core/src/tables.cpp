#include "idiomspace/tables.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <string_view>

#include "idiomspace/errors.hpp"

namespace idiomspace::tables {

namespace {

constexpr const char* kInstanceHeader[] = {"phrase_id",  "match_class", "doc_id",     "sent_index",
                                           "span_start", "span_end",    "head_index", "dep_index"};
constexpr const char* kConvHeader[] = {"phrase_id",  "slot",    "n",
                                       "m",          "conv_value", "flagged",
                                       "provider_fingerprint", "group"};
constexpr const char* kContHeader[] = {"phrase_id", "match_class",  "doc_id",
                                       "sent_index", "value",       "joint_logprob",
                                       "n_span_words", "provider_fingerprint"};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <std::size_t N>
void write_header(std::ostream& out, const char* const (&header)[N], const std::string& manifest) {
  if (!manifest.empty()) out << "# manifest: " << manifest << '\n';
  for (std::size_t i = 0; i < N; ++i) out << (i ? "\t" : "") << header[i];
  out << '\n';
}

// Reads the header and every data row, handing each row's fields to `row`.
template <std::size_t N>
void read_table(std::istream& in, const char* const (&header)[N], const char* what,
                const std::function<void(const std::vector<std::string>&, std::size_t)>& row) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (!have_header) {
      if (fields.size() != N) {
        throw ParseError(std::string(what) + " header has " + std::to_string(fields.size()) +
                             " columns, expected " + std::to_string(N),
                         line_no);
      }
      for (std::size_t i = 0; i < N; ++i) {
        if (fields[i] != header[i]) {
          throw ParseError(std::string(what) + " header column " + std::to_string(i + 1) +
                               " is '" + fields[i] + "', expected '" + header[i] + "'",
                           line_no);
        }
      }
      have_header = true;
      continue;
    }
    if (fields.size() != N) {
      throw ParseError(std::string(what) + " row has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(N),
                       line_no);
    }
    row(fields, line_no);
  }
  if (!have_header) throw ParseError(std::string(what) + " table has no header");
}

std::size_t to_size(const std::string& text, std::size_t line) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw ParseError("expected a non-negative integer, got '" + text + "'", line);
  }
  return v;
}

double to_double(const std::string& text, std::size_t line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError("expected a finite number, got '" + text + "'", line);
  }
  return v;
}

bool to_bool(const std::string& text, std::size_t line) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ParseError("expected true or false, got '" + text + "'", line);
}

corpus::MatchClass to_match_class(const std::string& text, std::size_t line) {
  const auto cls = corpus::parse_match_class(text);
  if (!cls) throw ParseError("unknown match class '" + text + "'", line);
  return *cls;
}

template <class Row, class Reader>
std::vector<Row> read_path(const std::filesystem::path& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return reader(in);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, p);
}

InstanceRow instance_row(const corpus::Corpus& corpus, const corpus::PhraseInstance& instance) {
  const auto& rec = corpus.at(instance.record);
  return {instance.phrase_id,  instance.match_class, rec.doc_id,
          rec.sent_index,      instance.span_start,  instance.span_end,
          instance.head_index, instance.dep_index};
}

void write_instances(std::ostream& out, const std::vector<InstanceRow>& rows,
                     const std::string& manifest) {
  write_header(out, kInstanceHeader, manifest);
  for (const auto& r : rows) {
    out << r.phrase_id << '\t' << corpus::to_string(r.match_class) << '\t' << r.doc_id << '\t'
        << r.sent_index << '\t' << r.span_start << '\t' << r.span_end << '\t' << r.head_index
        << '\t' << r.dep_index << '\n';
  }
}

void write_conv(std::ostream& out, const std::vector<ConvRow>& rows, const std::string& manifest) {
  write_header(out, kConvHeader, manifest);
  for (const auto& r : rows) {
    out << r.phrase_id << '\t' << corpus::to_string(r.slot) << '\t' << r.n << '\t' << r.m << '\t'
        << (r.value ? format_double(*r.value) : "NA") << '\t' << (r.flagged ? "true" : "false")
        << '\t' << r.provider_fingerprint << '\t' << conventionality::to_string(r.group) << '\n';
  }
}

void write_cont(std::ostream& out, const std::vector<ContRow>& rows, const std::string& manifest) {
  write_header(out, kContHeader, manifest);
  for (const auto& r : rows) {
    out << r.phrase_id << '\t' << corpus::to_string(r.match_class) << '\t' << r.doc_id << '\t'
        << r.sent_index << '\t' << format_double(r.value) << '\t' << format_double(r.joint_logprob)
        << '\t' << r.n_span_words << '\t' << r.provider_fingerprint << '\n';
  }
}

std::vector<InstanceRow> read_instances(std::istream& in) {
  std::vector<InstanceRow> rows;
  read_table(in, kInstanceHeader, "instance", [&](const auto& f, std::size_t line) {
    rows.push_back({f[0], to_match_class(f[1], line), f[2], to_size(f[3], line),
                    to_size(f[4], line), to_size(f[5], line), to_size(f[6], line),
                    to_size(f[7], line)});
  });
  return rows;
}

std::vector<ConvRow> read_conv(std::istream& in) {
  std::vector<ConvRow> rows;
  read_table(in, kConvHeader, "conventionality", [&](const auto& f, std::size_t line) {
    ConvRow r;
    r.phrase_id = f[0];
    const auto slot = corpus::parse_slot(f[1]);
    if (!slot) throw ParseError("unknown slot '" + f[1] + "'", line);
    r.slot = *slot;
    r.n = to_size(f[2], line);
    r.m = to_size(f[3], line);
    r.flagged = to_bool(f[5], line);
    if (f[4] != "NA") r.value = to_double(f[4], line);
    if (!r.flagged && !r.value) throw ParseError("unflagged row without a value", line);
    r.provider_fingerprint = f[6];
    if (f[7] == "target") {
      r.group = conventionality::Group::target;
    } else if (f[7] == "matched") {
      r.group = conventionality::Group::matched;
    } else {
      throw ParseError("unknown group '" + f[7] + "'", line);
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

std::vector<ContRow> read_cont(std::istream& in) {
  std::vector<ContRow> rows;
  read_table(in, kContHeader, "contingency", [&](const auto& f, std::size_t line) {
    rows.push_back({f[0], to_match_class(f[1], line), f[2], to_size(f[3], line),
                    to_double(f[4], line), to_double(f[5], line), to_size(f[6], line), f[7]});
  });
  return rows;
}

std::vector<ConvRow> read_conv(const std::filesystem::path& path) {
  return read_path<ConvRow>(path, [](std::istream& in) { return read_conv(in); });
}

std::vector<ContRow> read_cont(const std::filesystem::path& path) {
  return read_path<ContRow>(path, [](std::istream& in) { return read_cont(in); });
}

}  // namespace idiomspace::tables
