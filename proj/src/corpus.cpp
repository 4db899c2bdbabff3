#include "sentiparse/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "sentiparse/errors.h"
#include "sentiparse/text.h"

namespace sentiparse {

size_t Corpus::count(Polarity x) const {
  size_t n = 0;
  for (const auto& s : sentences) {
    if (s.label == x) ++n;
  }
  return n;
}

Corpus load_corpus(std::istream& in, const std::string& name) {
  Corpus corpus;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    auto where = [&] { return name + ":" + std::to_string(lineno) + ": "; };
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(where() + "expected <label> TAB <text>");
    }
    auto label = parse_polarity(std::string_view(line).substr(0, tab));
    if (!label) {
      throw ParseError(where() + "unknown label '" + line.substr(0, tab) +
                       "' (want 0, 1, neg or pos)");
    }
    std::vector<std::string> tokens;
    try {
      tokens = tokenize(std::string_view(line).substr(tab + 1));
    } catch (const ParseError& e) {
      throw ParseError(where() + e.what());
    }
    if (tokens.empty()) throw ParseError(where() + "empty sentence");
    corpus.sentences.push_back({*label, std::move(tokens)});
  }
  return corpus;
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  return load_corpus(in, path);
}

Corpus balance(const Corpus& corpus, SeededRng& rng) {
  size_t n_neg = corpus.count(Polarity::Negative);
  size_t n_pos = corpus.size() - n_neg;
  if (n_neg == n_pos) return corpus;

  Polarity majority = n_neg > n_pos ? Polarity::Negative : Polarity::Positive;
  size_t keep = std::min(n_neg, n_pos);

  std::vector<size_t> majority_idx;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.sentences[i].label == majority) majority_idx.push_back(i);
  }
  rng.shuffle(majority_idx);
  majority_idx.resize(keep);
  std::sort(majority_idx.begin(), majority_idx.end());

  Corpus out;
  size_t next = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.sentences[i].label == majority) {
      if (next < majority_idx.size() && majority_idx[next] == i) {
        out.sentences.push_back(corpus.sentences[i]);
        ++next;
      }
    } else {
      out.sentences.push_back(corpus.sentences[i]);
    }
  }
  return out;
}

std::vector<Fold> kfold(const Corpus& corpus, int k, SeededRng& rng) {
  if (k < 2) throw ConfigError("kfold: need at least 2 folds");
  if (static_cast<size_t>(k) > corpus.size()) {
    throw ConfigError("kfold: more folds than sentences (" + std::to_string(k) + " > " +
                      std::to_string(corpus.size()) + ")");
  }

  // deal each class round-robin after a seeded shuffle
  std::vector<int> assignment(corpus.size(), 0);
  for (Polarity cls : {Polarity::Negative, Polarity::Positive}) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < corpus.size(); ++i) {
      if (corpus.sentences[i].label == cls) idx.push_back(i);
    }
    rng.shuffle(idx);
    for (size_t r = 0; r < idx.size(); ++r) {
      assignment[idx[r]] = static_cast<int>(r % k);
    }
  }

  std::vector<Fold> folds(k);
  for (size_t i = 0; i < corpus.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      (assignment[i] == f ? folds[f].test : folds[f].train)
          .sentences.push_back(corpus.sentences[i]);
    }
  }
  return folds;
}

}  // namespace sentiparse
