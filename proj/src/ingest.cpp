#include "cbott/ingest.hpp"

#include "cbott/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cbott {

namespace {

using nlohmann::json;

ParseError make_error(ParseErrorKind kind, std::size_t line, std::string message) {
  return ParseError{kind, line, std::move(message)};
}

ParseResult parse_jsonl_record(const std::string& line, std::size_t line_number) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object())
    return make_error(ParseErrorKind::MalformedLine, line_number, "invalid JSON object");
  for (const char* field : {"host", "timestamp", "command"}) {
    if (!obj.contains(field))
      return make_error(ParseErrorKind::MissingField, line_number,
                        std::string("missing field '") + field + "'");
  }
  if (!obj["host"].is_string() || !obj["timestamp"].is_string() || !obj["command"].is_string())
    return make_error(ParseErrorKind::MalformedLine, line_number, "fields must be strings");

  ProcessAuditRecord record;
  record.host_id = obj["host"].get<std::string>();
  if (record.host_id.empty())
    return make_error(ParseErrorKind::EmptyHost, line_number, "empty host");
  const auto ts = parse_rfc3339(obj["timestamp"].get<std::string>());
  if (!ts)
    return make_error(ParseErrorKind::BadTimestamp, line_number,
                      "unparseable timestamp '" + obj["timestamp"].get<std::string>() + "'");
  record.timestamp = *ts;
  record.command = obj["command"].get<std::string>();
  return record;
}

ParseResult parse_csv_record(const std::string& line, std::size_t line_number) {
  std::vector<std::string> fields;
  if (!split_csv_line(line, fields))
    return make_error(ParseErrorKind::MalformedLine, line_number, "unbalanced quotes");
  if (fields.size() != 3)
    return make_error(ParseErrorKind::MissingField, line_number,
                      "expected 3 columns, got " + std::to_string(fields.size()));
  if (fields[0].empty())
    return make_error(ParseErrorKind::EmptyHost, line_number, "empty host");
  const auto ts = parse_rfc3339(fields[1]);
  if (!ts)
    return make_error(ParseErrorKind::BadTimestamp, line_number,
                      "unparseable timestamp '" + fields[1] + "'");
  return ProcessAuditRecord{fields[0], *ts, fields[2]};
}

}  // namespace

InputFormat parse_input_format(const std::string& name) {
  if (name == "jsonl") return InputFormat::Jsonl;
  if (name == "csv") return InputFormat::Csv;
  throw DataError("unknown input format '" + name + "' (expected jsonl or csv)");
}

const char* parse_error_kind_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MalformedLine: return "malformed-line";
    case ParseErrorKind::MissingField: return "missing-field";
    case ParseErrorKind::BadTimestamp: return "bad-timestamp";
    case ParseErrorKind::EmptyHost: return "empty-host";
  }
  return "unknown";
}

ParseResult parse_record(const std::string& line, InputFormat format,
                         std::size_t line_number) {
  if (format == InputFormat::Jsonl) return parse_jsonl_record(line, line_number);
  return parse_csv_record(line, line_number);
}

std::size_t Corpus::record_count() const {
  std::size_t total = 0;
  for (const auto& [host, records] : hosts) total += records.size();
  return total;
}

Corpus load_corpus(std::istream& in, const IngestOptions& options,
                   const std::string& source_path) {
  Corpus corpus;
  corpus.source_path = source_path;

  std::string line;
  std::size_t line_number = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (options.format == InputFormat::Csv && !header_skipped) {
      header_skipped = true;
      continue;
    }
    if (line.empty()) continue;

    ParseResult result = parse_record(line, options.format, line_number);
    if (auto* record = std::get_if<ProcessAuditRecord>(&result)) {
      corpus.hosts[record->host_id].push_back(std::move(*record));
      ++corpus.records_kept;
    } else {
      const ParseError& err = std::get<ParseError>(result);
      if (options.strict) {
        throw DataError(source_path + ":" + std::to_string(err.line) + ": " +
                        parse_error_kind_name(err.kind) + ": " + err.message);
      }
      corpus.errors.push_back(err);
      ++corpus.records_rejected;
    }
  }

  for (auto& [host, records] : corpus.hosts) {
    std::stable_sort(records.begin(), records.end(),
                     [](const ProcessAuditRecord& a, const ProcessAuditRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read corpus file '" + path + "'");
  return load_corpus(in, options, path);
}

void save_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& [host, records] : corpus.hosts) {
    for (const auto& record : records) {
      json obj;
      obj["host"] = record.host_id;
      obj["timestamp"] = format_rfc3339(record.timestamp);
      obj["command"] = record.command;
      out << obj.dump() << '\n';
    }
  }
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file '" + path + "'");
  save_corpus_jsonl(corpus, out);
}

}  // namespace cbott
