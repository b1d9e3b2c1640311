#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace coalsel {

// Minimal RFC-4180 reader/writer. Fields containing commas, quotes or
// newlines are quoted on output; quoted fields (including embedded newlines)
// are understood on input. Rows are plain string vectors.

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& path);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

// Writes a file atomically: stream into "<path>.tmp", then rename over path.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace coalsel
