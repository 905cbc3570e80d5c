#pragma once

#include "cbott/common.hpp"
#include "cbott/time.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace cbott {

// One parsed process-audit log line.
struct ProcessAuditRecord {
  std::string host_id;
  Timestamp timestamp = 0;
  std::string command;  // raw command text; may be empty

  bool operator==(const ProcessAuditRecord&) const = default;
};

enum class InputFormat { Jsonl, Csv };

InputFormat parse_input_format(const std::string& name);

enum class ParseErrorKind {
  MalformedLine,
  MissingField,
  BadTimestamp,
  EmptyHost,
};

struct ParseError {
  ParseErrorKind kind;
  std::size_t line = 0;  // 1-based line number in the source
  std::string message;
};

using ParseResult = std::variant<ProcessAuditRecord, ParseError>;

// Parses one logical record. JSONL objects carry {host, timestamp, command};
// CSV rows carry the same three columns (RFC 4180 quoting, no embedded
// newlines). `line_number` is only used to annotate errors.
ParseResult parse_record(const std::string& line, InputFormat format,
                         std::size_t line_number = 0);

// Per-host, chronologically sorted record streams.
struct Corpus {
  std::map<std::string, std::vector<ProcessAuditRecord>> hosts;
  std::string source_path;
  std::size_t records_kept = 0;
  std::size_t records_rejected = 0;
  std::vector<ParseError> errors;

  std::size_t record_count() const;
};

struct IngestOptions {
  InputFormat format = InputFormat::Jsonl;
  bool strict = false;  // abort on first parse error instead of skip-and-count
};

// Groups records by host and stably sorts each stream by timestamp.
// Lenient mode counts and skips malformed lines; strict mode throws
// DataError on the first one. A CSV header row is consumed, not parsed.
Corpus load_corpus(const std::string& path, const IngestOptions& options = {});
Corpus load_corpus(std::istream& in, const IngestOptions& options = {},
                   const std::string& source_path = "<stream>");

// Writes one JSON object per line in the canonical input schema.
void save_corpus_jsonl(const Corpus& corpus, const std::string& path);
void save_corpus_jsonl(const Corpus& corpus, std::ostream& out);

const char* parse_error_kind_name(ParseErrorKind kind);

}  // namespace cbott
