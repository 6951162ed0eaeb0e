#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace faultae::csv {

/// Splits one CSV record. Double-quoted fields may contain commas; "" inside
/// quotes is an escaped quote. A trailing '\r' is stripped.
std::vector<std::string> split_record(std::string_view line);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Parses a complete field as a double. Returns false if any character is left over.
bool parse_double(std::string_view text, double& out);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

std::string trim(std::string_view text);

}  // namespace faultae::csv
