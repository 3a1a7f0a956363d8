#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cone::text {

// Collapse every run of ASCII whitespace to a single space and trim both ends.
std::string normalize_whitespace(std::string_view s);

std::string to_lower_ascii(std::string_view s);

std::string trim(std::string_view s);

// Lowercased alphanumeric tokens; everything else separates tokens. Bytes
// >= 0x80 are kept inside tokens so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view s);

std::size_t word_count(std::string_view s);

// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
// Returned sentences are whitespace-normalized and never empty.
std::vector<std::string> split_sentences(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// Whitespace-normalized view of a source string that remembers, for every
// byte of the normalized form, the byte offset it came from.
struct NormalizedText {
  std::string text;
  std::vector<std::size_t> origin;
};

NormalizedText normalize_with_offsets(std::string_view s);

}  // namespace cone::text
