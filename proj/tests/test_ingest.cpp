#include "cbott/ingest.hpp"

#include <doctest.h>

#include <sstream>

using namespace cbott;

namespace {

ProcessAuditRecord expect_record(const ParseResult& result) {
  REQUIRE(std::holds_alternative<ProcessAuditRecord>(result));
  return std::get<ProcessAuditRecord>(result);
}

ParseError expect_error(const ParseResult& result) {
  REQUIRE(std::holds_alternative<ParseError>(result));
  return std::get<ParseError>(result);
}

}  // namespace

TEST_CASE("parse_record jsonl") {
  const auto rec = expect_record(parse_record(
      R"({"host":"10.0.0.5","timestamp":"2023-01-15T16:15:00Z","command":"C:\\Windows\\System32\\cmd.exe ipconfig -all"})",
      InputFormat::Jsonl));
  CHECK(rec.host_id == "10.0.0.5");
  CHECK(hour_of_day(rec.timestamp) == 16);
  CHECK(rec.command == R"(C:\Windows\System32\cmd.exe ipconfig -all)");

  const auto empty_cmd = expect_record(parse_record(
      R"({"host":"h1","timestamp":"1970-01-01T00:00:00Z","command":""})", InputFormat::Jsonl));
  CHECK(empty_cmd.timestamp == 0.0);
  CHECK(empty_cmd.command.empty());

  const auto missing = expect_error(
      parse_record(R"({"host":"h1","command":"x"})", InputFormat::Jsonl, 7));
  CHECK(missing.kind == ParseErrorKind::MissingField);
  CHECK(missing.line == 7);

  CHECK(expect_error(parse_record("{not json", InputFormat::Jsonl, 3)).kind ==
        ParseErrorKind::MalformedLine);
  CHECK(expect_error(parse_record(
            R"({"host":"","timestamp":"1970-01-01T00:00:00Z","command":"x"})", InputFormat::Jsonl))
            .kind == ParseErrorKind::EmptyHost);
  CHECK(expect_error(parse_record(
            R"({"host":"h","timestamp":"yesterday","command":"x"})", InputFormat::Jsonl))
            .kind == ParseErrorKind::BadTimestamp);
}

TEST_CASE("parse_record csv with quoting") {
  const auto rec = expect_record(parse_record(
      R"(h1,2023-01-15T16:15:00Z,"cmd.exe /c echo ""hi"", world")", InputFormat::Csv));
  CHECK(rec.command == R"(cmd.exe /c echo "hi", world)");

  CHECK(expect_error(parse_record("h1,2023-01-15T16:15:00Z", InputFormat::Csv)).kind ==
        ParseErrorKind::MissingField);
  CHECK(expect_error(parse_record(R"(h1,2023-01-15T16:15:00Z,"unbalanced)", InputFormat::Csv)).kind ==
        ParseErrorKind::MalformedLine);
}

TEST_CASE("load_corpus groups and sorts per host") {
  std::istringstream in(
      R"({"host":"a","timestamp":"2023-01-01T10:00:00Z","command":"second"}
{"host":"a","timestamp":"2023-01-01T09:00:00Z","command":"first"}
{"host":"b","timestamp":"2023-01-01T08:00:00Z","command":"only"}
)");
  const Corpus corpus = load_corpus(in);
  REQUIRE(corpus.hosts.size() == 2);
  REQUIRE(corpus.hosts.at("a").size() == 2);
  CHECK(corpus.hosts.at("a")[0].command == "first");
  CHECK(corpus.hosts.at("a")[1].command == "second");
  CHECK(corpus.hosts.at("b").size() == 1);
  CHECK(corpus.record_count() == 3);
}

TEST_CASE("load_corpus empty source") {
  std::istringstream in("");
  const Corpus corpus = load_corpus(in);
  CHECK(corpus.hosts.empty());
  CHECK(corpus.record_count() == 0);
}

TEST_CASE("load_corpus lenient vs strict") {
  std::string data;
  for (int i = 0; i < 9; ++i)
    data += R"({"host":"h","timestamp":"2023-01-01T00:00:0)" + std::to_string(i) +
            R"(Z","command":"c"})" + "\n";
  data += "{broken\n";

  std::istringstream lenient(data);
  const Corpus corpus = load_corpus(lenient);
  CHECK(corpus.records_kept == 9);
  CHECK(corpus.records_rejected == 1);
  REQUIRE(corpus.errors.size() == 1);
  CHECK(corpus.errors[0].line == 10);
  // Conservation: in = kept + rejected.
  CHECK(corpus.records_kept + corpus.records_rejected == 10);

  std::istringstream strict_in(data);
  IngestOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(load_corpus(strict_in, strict), DataError);
}

TEST_CASE("corpus jsonl round trip") {
  std::istringstream in(
      R"({"host":"a","timestamp":"2023-01-01T10:00:00Z","command":"dir c:\\x"}
{"host":"a","timestamp":"2023-01-01T10:00:30.5Z","command":""}
{"host":"b","timestamp":"2023-06-01T23:59:59Z","command":"echo \"q\""}
)");
  const Corpus first = load_corpus(in);
  std::ostringstream out;
  save_corpus_jsonl(first, out);
  std::istringstream again(out.str());
  const Corpus second = load_corpus(again);
  CHECK(first.hosts == second.hosts);
}

TEST_CASE("csv corpus skips header") {
  std::istringstream in("host,timestamp,command\nh1,2023-01-01T00:00:00Z,dir\n");
  IngestOptions options;
  options.format = InputFormat::Csv;
  const Corpus corpus = load_corpus(in, options);
  CHECK(corpus.records_kept == 1);
  CHECK(corpus.records_rejected == 0);
}
