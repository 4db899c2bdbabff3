#include "sentiparse/config.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "sentiparse/errors.h"
#include "sentiparse/text.h"

namespace sentiparse {

InductionConfig RunConfig::induction() const {
  InductionConfig c;
  c.l_max = l_max;
  c.tau_f = tau_f;
  c.tau_p = tau_p;
  c.tau_delta = tau_delta;
  c.tau_r = tau_r;
  c.tau_c = tau_c;
  c.iterations = iterations;
  c.tau_c2 = tau_c2;
  c.fit.alpha = sgd_alpha;
  c.fit.epsilon = sgd_epsilon;
  c.fit.max_epochs = sgd_max_epochs;
  c.min_fit_pairs = min_fit_pairs;
  return c;
}

void RunConfig::save(std::ostream& o) const {
  o << "command=" << command << "\n";
  o << "corpus=" << corpus << "\n";
  o << "grammar=" << grammar << "\n";
  o << "weights=" << weights << "\n";
  o << "out=" << out << "\n";
  o << "l_max=" << l_max << "\n";
  o << "tau_f=" << tau_f << "\n";
  o << "tau_p=" << format_double(tau_p) << "\n";
  o << "tau_delta=" << format_double(tau_delta) << "\n";
  o << "tau_r=" << tau_r << "\n";
  o << "tau_c=" << format_double(tau_c) << "\n";
  o << "tau_c2=" << format_double(tau_c2) << "\n";
  o << "iterations=" << iterations << "\n";
  o << "sgd_alpha=" << format_double(sgd_alpha) << "\n";
  o << "sgd_epsilon=" << format_double(sgd_epsilon) << "\n";
  o << "sgd_max_epochs=" << sgd_max_epochs << "\n";
  o << "min_fit_pairs=" << min_fit_pairs << "\n";
  o << "beam=" << beam << "\n";
  o << "epochs=" << epochs << "\n";
  o << "iters=" << iters << "\n";
  o << "alpha=" << format_double(alpha) << "\n";
  o << "lambda=" << format_double(lambda) << "\n";
  o << "seed=" << seed << "\n";
  o << "folds=" << folds << "\n";
  o << "threads=" << threads << "\n";
  o << "trees=" << (trees ? "true" : "false") << "\n";
  o << "fallback=" << polarity_name(fallback) << "\n";
}

void RunConfig::save_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write config file: " + path);
  save(f);
  f.flush();
  if (!f) throw ConfigError("failed writing config file: " + path);
}

namespace {

int64_t parse_i64(const std::string& s, const std::string& key) {
  char* end = nullptr;
  int64_t v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ParseError("bad integer for " + key + ": '" + s + "'");
  }
  return v;
}

uint64_t parse_u64(const std::string& s, const std::string& key) {
  char* end = nullptr;
  if (s.empty() || s[0] == '-') throw ParseError("bad unsigned integer for " + key + ": '" + s + "'");
  uint64_t v = std::strtoull(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) {
    throw ParseError("bad unsigned integer for " + key + ": '" + s + "'");
  }
  return v;
}

int parse_i32(const std::string& s, const std::string& key) {
  int64_t v = parse_i64(s, key);
  if (v < INT32_MIN || v > INT32_MAX) throw ParseError("integer out of range for " + key);
  return static_cast<int>(v);
}

double parse_f64(const std::string& s, const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw ParseError("bad number for " + key + ": '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError("bad boolean for " + key + ": '" + s + "'");
}

}  // namespace

RunConfig RunConfig::load(std::istream& in, const std::string& name) {
  RunConfig c;
  std::unordered_set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto at = [&](const std::string& msg) {
      return ParseError(name + ":" + std::to_string(lineno) + ": " + msg);
    };
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw at("expected key=value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (!seen.insert(key).second) throw at("duplicate key '" + key + "'");
    try {
      if (key == "command") c.command = val;
      else if (key == "corpus") c.corpus = val;
      else if (key == "grammar") c.grammar = val;
      else if (key == "weights") c.weights = val;
      else if (key == "out") c.out = val;
      else if (key == "l_max") c.l_max = parse_i32(val, key);
      else if (key == "tau_f") c.tau_f = parse_i64(val, key);
      else if (key == "tau_p") c.tau_p = parse_f64(val, key);
      else if (key == "tau_delta") c.tau_delta = parse_f64(val, key);
      else if (key == "tau_r") c.tau_r = parse_i64(val, key);
      else if (key == "tau_c") c.tau_c = parse_f64(val, key);
      else if (key == "tau_c2") c.tau_c2 = parse_f64(val, key);
      else if (key == "iterations") c.iterations = parse_i32(val, key);
      else if (key == "sgd_alpha") c.sgd_alpha = parse_f64(val, key);
      else if (key == "sgd_epsilon") c.sgd_epsilon = parse_f64(val, key);
      else if (key == "sgd_max_epochs") c.sgd_max_epochs = parse_i32(val, key);
      else if (key == "min_fit_pairs") c.min_fit_pairs = parse_i32(val, key);
      else if (key == "beam") c.beam = parse_i32(val, key);
      else if (key == "epochs") c.epochs = parse_i32(val, key);
      else if (key == "iters") c.iters = parse_i64(val, key);
      else if (key == "alpha") c.alpha = parse_f64(val, key);
      else if (key == "lambda") c.lambda = parse_f64(val, key);
      else if (key == "seed") c.seed = parse_u64(val, key);
      else if (key == "folds") c.folds = parse_i32(val, key);
      else if (key == "threads") c.threads = parse_i32(val, key);
      else if (key == "trees") c.trees = parse_bool(val, key);
      else if (key == "fallback") {
        auto p = parse_polarity(val);
        if (!p) throw ParseError("bad label for fallback: '" + val + "'");
        c.fallback = *p;
      } else {
        throw ParseError("unknown key '" + key + "'");
      }
    } catch (const ParseError& e) {
      throw at(e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file: " + path);
  return load(f, path);
}

}  // namespace sentiparse
