#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dialweight {

// ASCII lower-casing; bytes >= 0x80 are left alone.
std::string to_lower(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Fallback tokenizer for raw text: lower-cases, splits on whitespace and
// emits every ASCII punctuation character as its own token, except an
// apostrophe inside a word ("don't" stays whole).
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace dialweight
