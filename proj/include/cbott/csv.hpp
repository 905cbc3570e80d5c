#pragma once

#include <string>
#include <vector>

namespace cbott {

// RFC 4180 quoting. Fields without delimiters pass through unchanged.
std::string csv_escape(const std::string& field);

// Splits one line into fields; returns false on unbalanced quotes.
// Embedded newlines are out of contract (one logical record per line).
bool split_csv_line(const std::string& line, std::vector<std::string>& fields);

}  // namespace cbott
