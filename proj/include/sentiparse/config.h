#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "sentiparse/induction.h"
#include "sentiparse/label.h"

namespace sentiparse {

// full run configuration; serialized as a key=value snapshot next to every
// primary output so runs can be reproduced
struct RunConfig {
  std::string command;
  std::string corpus;
  std::string grammar;
  std::string weights;
  std::string out;

  int l_max = 7;
  int64_t tau_f = 4;
  double tau_p = 0.7;
  double tau_delta = 0.05;
  int64_t tau_r = 4;
  double tau_c = 0.75;
  double tau_c2 = 0.5;
  int iterations = 3;     // grammar induction passes (learn-grammar --iters)
  double sgd_alpha = 0.01;
  double sgd_epsilon = 1e-8;
  int sgd_max_epochs = 200;
  int min_fit_pairs = 3;

  int beam = 30;
  int epochs = 3;         // ranker passes; --iters on train overrides with raw steps
  int64_t iters = 0;      // 0: derive steps from epochs
  double alpha = 0.1;
  double lambda = 0.01;

  uint64_t seed = 1;
  int folds = 10;
  int threads = 1;
  bool trees = false;
  Polarity fallback = Polarity::Negative;

  InductionConfig induction() const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static RunConfig load(std::istream& in, const std::string& name);
  static RunConfig load_file(const std::string& path);

  bool operator==(const RunConfig&) const = default;
};

}  // namespace sentiparse
