#include <string_view>
#include <unordered_set>

#include "sentiparse/text.h"

namespace sentiparse {

namespace {

// fixed function-word list; punctuation is handled separately
const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> kSet = {
      "a", "an", "the", "and", "or", "but", "if", "while", "as", "until",
      "of", "at", "by", "for", "with", "about", "against", "between", "into",
      "through", "during", "before", "after", "above", "below", "to", "from",
      "up", "down", "in", "out", "on", "off", "over", "under", "again",
      "further", "then", "once", "here", "there", "when", "where", "why",
      "how", "all", "any", "both", "each", "few", "more", "most", "other",
      "some", "such", "no", "nor", "not", "only", "own", "same", "so",
      "than", "too", "very", "just", "now", "ever", "also",
      "i", "me", "my", "myself", "we", "us", "our", "ours", "ourselves",
      "you", "your", "yours", "yourself", "yourselves", "he", "him", "his",
      "himself", "she", "her", "hers", "herself", "it", "its", "itself",
      "they", "them", "their", "theirs", "themselves", "what", "which",
      "who", "whom", "whose", "this", "that", "these", "those",
      "am", "is", "are", "was", "were", "be", "been", "being",
      "have", "has", "had", "having", "do", "does", "did", "doing",
      "will", "would", "shall", "should", "can", "could", "may", "might",
      "must", "ought", "need", "dare",
      "s", "t", "d", "ll", "m", "re", "ve", "y",
      "isn", "aren", "wasn", "weren", "hasn", "haven", "hadn", "doesn",
      "don", "didn", "won", "wouldn", "shan", "shouldn", "couldn",
      "mightn", "mustn", "ain",
      "because", "since", "although", "though", "unless", "whether",
      "either", "neither", "one", "such",
  };
  return kSet;
}

}  // namespace

bool is_stopword(std::string_view token) {
  return stopword_set().count(token) != 0;
}

}  // namespace sentiparse
