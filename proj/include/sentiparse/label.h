#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "sentiparse/errors.h"

namespace sentiparse {

enum class Polarity : uint8_t { Negative = 0, Positive = 1 };

constexpr Polarity opposite(Polarity x) {
  return x == Polarity::Negative ? Polarity::Positive : Polarity::Negative;
}

constexpr char polarity_char(Polarity x) {
  return x == Polarity::Negative ? 'N' : 'P';
}

constexpr const char* polarity_name(Polarity x) {
  return x == Polarity::Negative ? "neg" : "pos";
}

// accepts the corpus label spellings: 0/1 and neg/pos
inline std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "0" || s == "neg") return Polarity::Negative;
  if (s == "1" || s == "pos") return Polarity::Positive;
  return std::nullopt;
}

struct PolarityDist {
  double p_neg = 0.5;
  double p_pos = 0.5;

  double prob(Polarity x) const { return x == Polarity::Negative ? p_neg : p_pos; }

  // argmax label; nullopt on an exact tie
  std::optional<Polarity> lean() const {
    if (p_neg > p_pos) return Polarity::Negative;
    if (p_pos > p_neg) return Polarity::Positive;
    return std::nullopt;
  }

  bool valid(double tol = 1e-9) const {
    return p_neg >= 0.0 && p_neg <= 1.0 && p_pos >= 0.0 && p_pos <= 1.0 &&
           std::fabs(p_neg + p_pos - 1.0) <= tol;
  }

  static PolarityDist from_prob(Polarity x, double p) {
    return x == Polarity::Negative ? PolarityDist{p, 1.0 - p} : PolarityDist{1.0 - p, p};
  }

  bool operator==(const PolarityDist&) const = default;
};

}  // namespace sentiparse
