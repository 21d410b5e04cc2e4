#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tabml {

/// Raised for malformed or inconsistent input data: parse failures, schema
/// violations, values that a learner cannot accept.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string_view trim(std::string_view s);

/// Splits on every occurrence of `sep`; empty fields are kept.
std::vector<std::string_view> split(std::string_view s, char sep);

std::vector<std::string_view> split_lines(std::string_view text);

/// Shortest decimal representation that parses back to the same double.
std::string format_number(double value);

/// Parses the whole of `s` as a finite double; nullopt on any trailing junk,
/// NaN or infinity.
std::optional<double> parse_number(std::string_view s);

std::optional<long long> parse_integer(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace tabml
