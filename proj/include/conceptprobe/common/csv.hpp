#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace conceptprobe::csv {

/// RFC 4180 field quoting: fields containing a comma, quote or newline are
/// wrapped in double quotes with inner quotes doubled.
std::string quote(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Splits one CSV record (no embedded newlines).
std::vector<std::string> split(std::string_view line);

/// Fixed 6-decimal rendering used for every rate/accuracy column.
std::string format_rate(double value);

}  // namespace conceptprobe::csv
