#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace harvest::text {

/// Replaces invalid UTF-8 sequences with U+FFFD. Valid input is returned unchanged.
std::string decode_utf8_lossy(std::string_view bytes);

/// Decodes UTF-8 into code points; invalid bytes map to U+FFFD.
std::u32string to_code_points(std::string_view utf8);

/// Decodes %XX escapes. Malformed escapes are kept verbatim.
std::string percent_decode(std::string_view s);

/// Encodes every byte outside RFC 3986 "unreserved" as %XX (uppercase hex).
std::string percent_encode(std::string_view s);

/// Splits into physical lines. "\n" and "\r\n" terminate lines; a trailing
/// terminator does not produce an empty final line.
std::vector<std::string_view> split_lines(std::string_view content);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

/// True when the value consists only of ':' and '/' characters (and is non-empty).
bool is_separator_junk(std::string_view s);

/// Maps a byte offset to a 1-based line number using the newline positions.
class LineIndex {
public:
    explicit LineIndex(std::string_view content);
    std::uint32_t line_of(std::size_t offset) const;
    std::uint32_t column_of(std::size_t offset) const;

private:
    std::vector<std::size_t> starts_;
};

}  // namespace harvest::text
