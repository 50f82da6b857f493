#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace pcic {

/// Splits one CSV line into fields. Handles double-quoted fields with ""
/// escapes; no embedded newlines (transaction logs are line-per-row).
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads the next line, tolerating trailing \r and an initial UTF-8 BOM.
/// Returns false at end of stream.
bool read_csv_line(std::istream& in, std::string& line, bool first_line = false);

/// Quotes a field only when it contains a separator, quote, or whitespace edge.
std::string csv_escape(std::string_view field);

}  // namespace pcic
