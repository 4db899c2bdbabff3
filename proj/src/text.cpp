#include "sentiparse/text.h"

#include <cctype>
#include <cstdio>

#include "sentiparse/errors.h"

namespace sentiparse {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }

// rejects malformed UTF-8; returns the byte length of the sequence at p
size_t utf8_sequence_length(const unsigned char* p, size_t remaining) {
  unsigned char c = p[0];
  if (c < 0x80) return 1;
  size_t len;
  if ((c & 0xE0) == 0xC0) len = 2;
  else if ((c & 0xF0) == 0xE0) len = 3;
  else if ((c & 0xF8) == 0xF0) len = 4;
  else return 0;
  if (len > remaining) return 0;
  for (size_t k = 1; k < len; ++k) {
    if ((p[k] & 0xC0) != 0x80) return 0;
  }
  return len;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  const unsigned char* p = reinterpret_cast<const unsigned char*>(text.data());
  size_t i = 0;
  while (i < text.size()) {
    size_t len = utf8_sequence_length(p + i, text.size() - i);
    if (len == 0) throw ParseError("invalid UTF-8 byte sequence");
    i += len;
  }
  return std::string(text);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::string norm = normalize_text(text);
  for (char& c : norm) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }

  std::vector<std::string> out;
  size_t i = 0;
  while (i < norm.size()) {
    while (i < norm.size() && std::isspace(static_cast<unsigned char>(norm[i]))) ++i;
    if (i >= norm.size()) break;
    size_t start = i;
    while (i < norm.size() && !std::isspace(static_cast<unsigned char>(norm[i]))) ++i;
    std::string_view word(norm.data() + start, i - start);

    // peel leading punctuation
    size_t lo = 0;
    while (lo < word.size() && is_ascii_punct(word[lo])) {
      out.emplace_back(1, word[lo]);
      ++lo;
    }
    // find the trailing punctuation run, emitted after the core
    size_t hi = word.size();
    while (hi > lo && is_ascii_punct(word[hi - 1])) --hi;

    if (hi > lo) {
      std::string_view core = word.substr(lo, hi - lo);
      // "it's" -> it ' s
      if (core.size() > 2 && core.substr(core.size() - 2) == "'s") {
        out.emplace_back(core.substr(0, core.size() - 2));
        out.emplace_back("'");
        out.emplace_back("s");
      } else {
        out.emplace_back(core);
      }
    }
    for (size_t k = hi; k < word.size(); ++k) out.emplace_back(1, word[k]);
  }
  return out;
}

bool is_punct_token(std::string_view token) {
  if (token.empty()) return false;
  for (unsigned char c : token) {
    if (!is_ascii_punct(c)) return false;
  }
  return true;
}

bool all_stop_or_punct(const std::vector<std::string>& tokens, size_t i, size_t j) {
  for (size_t k = i; k < j; ++k) {
    if (!is_stopword(tokens[k]) && !is_punct_token(tokens[k])) return false;
  }
  return true;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_tokens(const std::vector<std::string>& tokens, size_t i, size_t j) {
  std::string out;
  for (size_t k = i; k < j; ++k) {
    if (k > i) out += ' ';
    out += tokens[k];
  }
  return out;
}

}  // namespace sentiparse
