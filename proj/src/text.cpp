#include "dialweight/text.hpp"

#include <cctype>

namespace dialweight {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& word : split_whitespace(to_lower(text))) {
    std::string current;
    for (std::size_t i = 0; i < word.size(); ++i) {
      const unsigned char c = static_cast<unsigned char>(word[i]);
      const bool inner_apostrophe = c == '\'' && !current.empty() && i + 1 < word.size() &&
                                    std::isalnum(static_cast<unsigned char>(word[i + 1]));
      if (std::ispunct(c) && !inner_apostrophe) {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
        out.emplace_back(1, static_cast<char>(c));
      } else {
        current.push_back(static_cast<char>(c));
      }
    }
    if (!current.empty()) out.push_back(std::move(current));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace dialweight
