#include "sentiparse/polarity.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentiparse/errors.h"

namespace sentiparse {

PolarityDist eval_dictionary(const DictionaryRule& rule) { return rule.dist; }

PolarityDist eval_glue(const PolarityDist& left, const PolarityDist& right) {
  double both_neg = left.p_neg * right.p_neg;
  double both_pos = left.p_pos * right.p_pos;
  double den = both_neg + both_pos;
  if (den == 0.0) {
    throw EvalError("glue of contradictory certain distributions");
  }
  return {both_neg / den, both_pos / den};
}

PolarityDist eval_combination(const CombinationRule& rule, const double* slot_probs,
                              int n_slots) {
  if (n_slots != rule.slot_count()) {
    throw InternalError("eval_combination: slot count mismatch for '" + rule.id() + "'");
  }
  double z = rule.theta[0];
  for (int k = 0; k < n_slots; ++k) {
    z += rule.theta[k + 1] * slot_probs[k];
  }
  return PolarityDist::from_prob(rule.lhs, logistic(z));
}

PolarityDist eval_auxiliary(const PolarityDist& inner) { return inner; }

namespace {

double dot(const std::vector<double>& theta, const CompositionInput& d) {
  double z = 0.0;
  for (int k = 0; k < d.dim; ++k) z += theta[k] * d.x[k];
  return z;
}

}  // namespace

double composition_cost(const std::vector<double>& theta,
                        const std::vector<CompositionInput>& data) {
  double cost = 0.0;
  for (const auto& d : data) {
    double r = logistic(dot(theta, d)) - d.y;
    cost += 0.5 * r * r;
  }
  return cost;
}

std::vector<double> composition_gradient(const std::vector<double>& theta,
                                         const std::vector<CompositionInput>& data) {
  std::vector<double> grad(theta.size(), 0.0);
  for (const auto& d : data) {
    double h = logistic(dot(theta, d));
    double g = (h - d.y) * h * (1.0 - h);
    for (int k = 0; k < d.dim; ++k) grad[k] += g * d.x[k];
  }
  return grad;
}

FitResult fit_rule_params(int dim, const std::vector<CompositionInput>& data,
                          const FitOptions& opt, SeededRng& rng) {
  if (dim < 2 || dim > 3) throw ConfigError("fit_rule_params: dim must be 2 or 3");
  if (data.empty()) throw ConfigError("fit_rule_params: no data");
  for (const auto& d : data) {
    if (d.dim != dim) throw ConfigError("fit_rule_params: inconsistent instance arity");
  }

  std::vector<double> theta(dim, 0.0);
  std::vector<double> best = theta;
  double best_cost = composition_cost(theta, data);

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});

  bool converged = false;
  int epoch = 0;
  for (; epoch < opt.max_epochs && !converged; ++epoch) {
    rng.shuffle(order);
    for (size_t idx : order) {
      const auto& d = data[idx];
      double h = logistic(dot(theta, d));
      double g = (h - d.y) * h * (1.0 - h);
      double step_sq = 0.0;
      for (int k = 0; k < dim; ++k) {
        double delta = opt.alpha * g * d.x[k];
        theta[k] -= delta;
        step_sq += delta * delta;
      }
      if (step_sq < opt.epsilon) {
        converged = true;
        break;
      }
    }
    double c = composition_cost(theta, data);
    if (c < best_cost) {
      best_cost = c;
      best = theta;
    }
  }

  double final_cost = composition_cost(theta, data);
  FitResult out;
  if (final_cost <= best_cost) {
    out.theta = std::move(theta);
    out.cost = final_cost;
  } else {
    out.theta = std::move(best);
    out.cost = best_cost;
  }
  out.converged = converged;
  out.epochs = epoch;
  return out;
}

}  // namespace sentiparse
