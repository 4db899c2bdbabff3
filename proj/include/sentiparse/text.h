#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sentiparse {

// Validates UTF-8 and returns the text in composed form. The target corpora
// are ASCII, which is composition-invariant, so this is a checked pass-through.
std::string normalize_text(std::string_view text);

// Lowercases, splits on whitespace, peels leading and trailing ASCII
// punctuation into single-character tokens, and splits a trailing
// apostrophe-s ("it's" -> it ' s).
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view token);

// every character is ASCII punctuation
bool is_punct_token(std::string_view token);

// true when tokens[i..j) consists solely of stop words and punctuation
bool all_stop_or_punct(const std::vector<std::string>& tokens, size_t i, size_t j);

std::string join_tokens(const std::vector<std::string>& tokens, size_t i, size_t j);

// 17 significant digits; round-trips doubles exactly
std::string format_double(double v);

}  // namespace sentiparse
