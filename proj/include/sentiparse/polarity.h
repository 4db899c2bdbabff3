#pragma once

#include <array>
#include <vector>

#include "sentiparse/grammar.h"
#include "sentiparse/label.h"
#include "sentiparse/rng.h"

namespace sentiparse {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// dictionary rules pass their stored distribution through
PolarityDist eval_dictionary(const DictionaryRule& rule);

// glue: P(X) = Pl(X)Pr(X) / (Pl(X)Pr(X) + Pl(~X)Pr(~X)); throws EvalError
// when both products vanish (contradictory certain inputs)
PolarityDist eval_glue(const PolarityDist& left, const PolarityDist& right);

// combination: P(lhs) = h(theta_0 + sum_k theta_k+1 * slot_probs[k]) where
// slot_probs[k] is the child's probability of slot k's polarity
PolarityDist eval_combination(const CombinationRule& rule, const double* slot_probs,
                              int n_slots);

// auxiliary rules pass the non-E child through
PolarityDist eval_auxiliary(const PolarityDist& inner);

// one regression instance: x = (1, p1[, p2]), y = target probability
struct CompositionInput {
  std::array<double, 3> x{1.0, 0.0, 0.0};
  int dim = 2;  // 2 for one slot, 3 for two
  double y = 0.5;
};

// J(theta) = 1/2 sum_i (h(theta.x_i) - y_i)^2
double composition_cost(const std::vector<double>& theta,
                        const std::vector<CompositionInput>& data);
std::vector<double> composition_gradient(const std::vector<double>& theta,
                                         const std::vector<CompositionInput>& data);

struct FitOptions {
  double alpha = 0.01;
  double epsilon = 1e-8;  // stop when ||theta_next - theta||^2 < epsilon
  int max_epochs = 200;
};

struct FitResult {
  std::vector<double> theta;
  bool converged = false;
  int epochs = 0;
  double cost = 0.0;
};

// stochastic per-instance updates in shuffled order from theta = 0; returns
// the best cost seen if the step-size stop never fires within the cap
FitResult fit_rule_params(int dim, const std::vector<CompositionInput>& data,
                          const FitOptions& opt, SeededRng& rng);

}  // namespace sentiparse
