#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "sentiparse/label.h"
#include "sentiparse/rng.h"

namespace sentiparse {

struct LabeledSentence {
  Polarity label = Polarity::Negative;
  std::vector<std::string> tokens;
};

struct Corpus {
  std::vector<LabeledSentence> sentences;

  size_t size() const { return sentences.size(); }
  size_t count(Polarity x) const;
};

// TSV: <label> TAB <text>, labels 0/1 or neg/pos, '#' lines and blank lines
// ignored. Errors carry <name>:<line>.
Corpus load_corpus(std::istream& in, const std::string& name);
Corpus load_corpus_file(const std::string& path);

// downsamples the majority class to the minority size; keeps input order;
// no-op when the classes are already balanced
Corpus balance(const Corpus& corpus, SeededRng& rng);

struct Fold {
  Corpus train;
  Corpus test;
};

// stratified k-fold split; per-fold class ratio stays within one instance
// of the global ratio
std::vector<Fold> kfold(const Corpus& corpus, int k, SeededRng& rng);

}  // namespace sentiparse
