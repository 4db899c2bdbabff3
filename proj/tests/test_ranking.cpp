#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sentiparse/errors.h"
#include "sentiparse/parser.h"
#include "sentiparse/ranking.h"
#include "sentiparse/rng.h"
#include "synthetic.h"

using namespace sentiparse;

namespace {

DictionaryRule dict_rule(Polarity lhs, std::vector<std::string> frag, double p_lhs) {
  DictionaryRule d;
  d.lhs = lhs;
  d.fragment = std::move(frag);
  d.dist = PolarityDist::from_prob(lhs, p_lhs);
  return d;
}

Grammar worked_grammar() {
  CombinationRule not_p;
  not_p.lhs = Polarity::Negative;
  not_p.type = RuleType::Negation;
  not_p.pattern = {PatternElem::term("not"), PatternElem::slot_of(Polarity::Positive)};
  not_p.theta = {9.0, -7.8};
  return Grammar({dict_rule(Polarity::Positive, {"good"}, 0.8),
                  dict_rule(Polarity::Negative, {"bad"}, 0.8)},
                 {not_p}, 7, 0.5);
}

std::vector<double> dense_grad(const SparseVec& g, size_t n) {
  std::vector<double> out(n, 0.0);
  for (const auto& [f, v] : g) out[static_cast<size_t>(f)] = v;
  return out;
}

template <class E, class Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  } catch (...) {
    FAIL("wrong exception type");
  }
  FAIL("expected an exception");
  return {};
}

}  // namespace

TEST_CASE("feature space naming and indexing") {
  Grammar g = worked_grammar();
  FeatureSpace fs(g);
  REQUIRE(fs.size() == 5);  // 2 shared + 1 combination + 2 dictionary
  CHECK(fs.name(FeatureSpace::kCombHit) == "CombHit");
  CHECK(fs.name(FeatureSpace::kDictHit) == "DictHit");
  CHECK(fs.name(fs.comb_feature(0)) == "CombRule|N→not [P]");
  CHECK(fs.name(fs.dict_feature(0)) == "DictRule|P→good");
  CHECK(fs.name(fs.dict_feature(1)) == "DictRule|N→bad");
  for (int f = 0; f < fs.size(); ++f) {
    CHECK(fs.index_of(fs.name(f)) == f);
  }
  CHECK(fs.index_of("DictRule|P→wonderful") == -1);
  CHECK(fs.index_of("") == -1);
}

TEST_CASE("feature extraction counts rule applications") {
  Grammar g = worked_grammar();
  ParserTables tables(g);
  RuleScores rs = RuleScores::zeros(g);
  FeatureSpace fs(g);

  DecodeResult r = decode(tables, rs, {"not", "good"}, {});
  REQUIRE(r.k_best.size() == 2);

  // negation reading: one combination and one dictionary application
  FeatureVector f0 = extract_features(fs, r.k_best[0]);
  REQUIRE(f0.items.size() == 4);
  CHECK(f0.items[0] == std::pair<int, double>{FeatureSpace::kCombHit, 1.0});
  CHECK(f0.items[1] == std::pair<int, double>{FeatureSpace::kDictHit, 1.0});
  CHECK(f0.items[2] == std::pair<int, double>{fs.comb_feature(0), 1.0});
  CHECK(f0.items[3] == std::pair<int, double>{fs.dict_feature(0), 1.0});

  // auxiliary reading touches only the dictionary
  FeatureVector f1 = extract_features(fs, r.k_best[1]);
  REQUIRE(f1.items.size() == 2);
  CHECK(f1.items[0] == std::pair<int, double>{FeatureSpace::kDictHit, 1.0});
  CHECK(f1.items[1] == std::pair<int, double>{fs.dict_feature(0), 1.0});

  // glue of two dictionary hits accumulates counts
  DecodeResult gg = decode(tables, rs, {"good", "good"}, {});
  FeatureVector f2 = extract_features(fs, gg.k_best[0]);
  REQUIRE(f2.items.size() == 2);
  CHECK(f2.items[0] == std::pair<int, double>{FeatureSpace::kDictHit, 2.0});
  CHECK(f2.items[1] == std::pair<int, double>{fs.dict_feature(0), 2.0});

  Weights w = Weights::zeros(fs.size());
  w.psi = {0.0, 0.5, 0.0, 0.25, 0.0};
  CHECK(score_features(f2, w) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("log partition handles shifts and extremes") {
  CHECK(log_partition_scores({0.0, 0.0, 0.0}) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(log_partition_scores({1000.0, 1000.0}) ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));
  CHECK(log_partition_scores({-1000.0}) == doctest::Approx(-1000.0).epsilon(1e-12));
  CHECK_THROWS_AS(log_partition_scores({}), InternalError);

  FeatureVector a, b;
  a.add(0, 1.0);
  b.add(1, 2.0);
  Weights w = Weights::zeros(2);
  w.psi = {0.7, -0.2};
  double direct = log_partition_scores({0.7, -0.4});
  CHECK(log_partition({a, b}, w) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("objective: uniform beam worked example") {
  // candidates A={f0}, B={f1}, C={f0,f1}; zero weights; gold = {A}
  FeatureVector A, B, C;
  A.add(0, 1.0);
  B.add(1, 1.0);
  C.add(0, 1.0);
  C.add(1, 1.0);
  RankInstance inst;
  inst.candidates = {A, B, C};
  inst.gold = {0};

  Weights w = Weights::zeros(2);
  ObjectiveResult res = objective_and_gradient({inst}, w, 0.0);
  CHECK(res.value == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
  auto g = dense_grad(res.grad, 2);
  // E_gold[f] - E_all[f]: f0: 1 - 2/3, f1: 0 - 2/3
  CHECK(g[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

  // the regularizer only shifts by -lambda*psi and -lambda/2 ||psi||^2
  w.psi = {0.5, -1.0};
  ObjectiveResult plain = objective_and_gradient({inst}, w, 0.0);
  ObjectiveResult reg = objective_and_gradient({inst}, w, 0.1);
  CHECK(reg.value ==
        doctest::Approx(plain.value - 0.05 * (0.25 + 1.0)).epsilon(1e-12));
  auto gp = dense_grad(plain.grad, 2);
  auto gr = dense_grad(reg.grad, 2);
  CHECK(gr[0] == doctest::Approx(gp[0] - 0.1 * 0.5).epsilon(1e-12));
  CHECK(gr[1] == doctest::Approx(gp[1] + 0.1).epsilon(1e-12));
}

TEST_CASE("objective: gradient vanishes exactly when every candidate is gold") {
  FeatureVector A, B;
  A.add(0, 1.0);
  A.add(1, 0.5);
  B.add(1, 2.0);
  RankInstance inst;
  inst.candidates = {A, B};
  inst.gold = {0, 1};

  Weights w = Weights::zeros(2);
  w.psi = {0.3, -0.7};  // nonzero scores, still a perfect beam
  ObjectiveResult res = objective_and_gradient({inst}, w, 0.0);
  CHECK(res.value == 0.0);
  CHECK(res.grad.empty());
}

TEST_CASE("objective input validation") {
  RankInstance empty_beam;
  Weights w = Weights::zeros(2);
  CHECK_THROWS_AS(objective_and_gradient({empty_beam}, w, 0.0), InternalError);

  RankInstance no_gold;
  no_gold.candidates = {FeatureVector{}};
  CHECK_THROWS_AS(objective_and_gradient({no_gold}, w, 0.0), InternalError);

  RankInstance bad_gold;
  bad_gold.candidates = {FeatureVector{}};
  bad_gold.gold = {2};
  CHECK_THROWS_AS(objective_and_gradient({bad_gold}, w, 0.0), InternalError);

  RankInstance dup_gold;
  dup_gold.candidates = {FeatureVector{}, FeatureVector{}};
  dup_gold.gold = {0, 0};
  CHECK_THROWS_AS(objective_and_gradient({dup_gold}, w, 0.0), InternalError);
}

TEST_CASE("objective gradient matches central finite differences") {
  SeededRng rng(606);
  const int kFeatures = 6;
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<RankInstance> instances;
    size_t n_inst = 1 + rng.uniform_index(3);
    for (size_t q = 0; q < n_inst; ++q) {
      RankInstance inst;
      size_t m = 2 + rng.uniform_index(4);
      for (size_t c = 0; c < m; ++c) {
        FeatureVector f;
        for (int k = 0; k < kFeatures; ++k) {
          if (rng.uniform01() < 0.5) f.add(k, 0.5 + 1.5 * rng.uniform01());
        }
        inst.candidates.push_back(std::move(f));
      }
      size_t n_gold = 1 + rng.uniform_index(m - 1);
      for (size_t c = 0; c < n_gold; ++c) inst.gold.push_back(static_cast<int>(c));
      instances.push_back(std::move(inst));
    }
    double lambda = trial % 3 == 0 ? 0.0 : 0.3 * rng.uniform01();
    Weights w = Weights::zeros(kFeatures);
    for (double& p : w.psi) p = rng.uniform(-1.0, 1.0);

    auto g = dense_grad(objective_and_gradient(instances, w, lambda).grad, kFeatures);
    const double eps = 1e-6;
    for (int k = 0; k < kFeatures; ++k) {
      Weights hi = w, lo = w;
      hi.psi[k] += eps;
      lo.psi[k] -= eps;
      double fd = (objective_and_gradient(instances, hi, lambda).value -
                   objective_and_gradient(instances, lo, lambda).value) /
                  (2 * eps);
      double denom = std::max({std::fabs(fd), std::fabs(g[k]), 1e-8});
      CHECK(std::fabs(fd - g[k]) / denom <= 1e-5);
    }
  }
}

TEST_CASE("adagrad step") {
  Weights w = Weights::zeros(3);
  adagrad_step(w, {{0, 2.0}}, 0.1);
  CHECK(w.gsq[0] == 4.0);
  CHECK(w.psi[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(w.psi[1] == 0.0);
  CHECK(w.gsq[1] == 0.0);

  adagrad_step(w, {{0, 2.0}}, 0.1);
  CHECK(w.gsq[0] == 8.0);
  CHECK(w.psi[0] == doctest::Approx(0.17071067811865476).epsilon(1e-14));

  // descent direction when the gradient is negative
  adagrad_step(w, {{2, -3.0}}, 0.5);
  CHECK(w.gsq[2] == 9.0);
  CHECK(w.psi[2] == doctest::Approx(-0.5).epsilon(1e-15));

  // explicit zero entries leave the accumulator untouched
  adagrad_step(w, {{1, 0.0}}, 0.5);
  CHECK(w.psi[1] == 0.0);
  CHECK(w.gsq[1] == 0.0);
}

TEST_CASE("weights serialization round-trip") {
  Grammar g = worked_grammar();
  FeatureSpace fs(g);
  Weights w = Weights::zeros(fs.size());
  w.psi[FeatureSpace::kDictHit] = 0.25;
  w.gsq[FeatureSpace::kDictHit] = 1.0;
  w.psi[fs.dict_feature(0)] = -0.5;
  w.gsq[fs.dict_feature(0)] = 2.25;

  std::ostringstream out;
  w.save(out, fs);
  CHECK(out.str() ==
        "DictHit\t0.25\t1\n"
        "DictRule|P→good\t-0.5\t2.25\n");

  std::istringstream in(out.str());
  Weights back = Weights::load(in, "w", fs);
  CHECK(back.psi == w.psi);
  CHECK(back.gsq == w.gsq);

  // zero rows are implicit; a weights file may also carry comments
  std::istringstream sparse("# trained weights\nCombHit\t0.125\t4\n");
  Weights s = Weights::load(sparse, "w", fs);
  CHECK(s.psi[FeatureSpace::kCombHit] == 0.125);
  CHECK(s.gsq[FeatureSpace::kCombHit] == 4.0);
  CHECK(s.psi[FeatureSpace::kDictHit] == 0.0);
}

TEST_CASE("weights load errors carry name and line") {
  Grammar g = worked_grammar();
  FeatureSpace fs(g);
  {
    std::istringstream in("DictHit\t0.5\n");
    auto msg = thrown_message<ParseError>([&] { Weights::load(in, "w", fs); });
    CHECK(msg.find("w:1") != std::string::npos);
    CHECK(msg.find("3 tab-separated") != std::string::npos);
  }
  {
    std::istringstream in("DictHit\t0.5\t1\nNoSuchFeature\t1\t1\n");
    auto msg = thrown_message<ParseError>([&] { Weights::load(in, "w", fs); });
    CHECK(msg.find("w:2") != std::string::npos);
    CHECK(msg.find("unknown feature") != std::string::npos);
  }
  {
    std::istringstream in("DictHit\t0.5\t1\nDictHit\t0.5\t1\n");
    auto msg = thrown_message<ParseError>([&] { Weights::load(in, "w", fs); });
    CHECK(msg.find("duplicate feature") != std::string::npos);
  }
  {
    std::istringstream in("DictHit\tzz\t1\n");
    auto msg = thrown_message<ParseError>([&] { Weights::load(in, "w", fs); });
    CHECK(msg.find("weight") != std::string::npos);
  }
  {
    std::istringstream in("DictHit\t0.5\t-1\n");
    auto msg = thrown_message<ParseError>([&] { Weights::load(in, "w", fs); });
    CHECK(msg.find("negative accumulator") != std::string::npos);
  }
  CHECK_THROWS_AS(Weights::load_file("/nonexistent/weights", fs), ConfigError);
}

TEST_CASE("make_rule_scores folds shared and per-rule weights") {
  Grammar g = worked_grammar();
  FeatureSpace fs(g);
  Weights w = Weights::zeros(fs.size());
  w.psi[FeatureSpace::kCombHit] = 0.5;
  w.psi[FeatureSpace::kDictHit] = 0.25;
  w.psi[fs.comb_feature(0)] = 0.1;
  w.psi[fs.dict_feature(0)] = 0.2;

  RuleScores rs = make_rule_scores(fs, w);
  REQUIRE(rs.comb.size() == 1);
  REQUIRE(rs.dict.size() == 2);
  CHECK(rs.comb[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(rs.dict[0] == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(rs.dict[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("train_ranker: determinism, zero steps, skip accounting") {
  Grammar g = worked_grammar();
  ParserTables tables(g);
  FeatureSpace fs(g);

  Corpus corpus;
  corpus.sentences.push_back({Polarity::Positive, {"good"}});
  corpus.sentences.push_back({Polarity::Negative, {"bad"}});
  corpus.sentences.push_back({Polarity::Negative, {"not", "good"}});
  corpus.sentences.push_back({Polarity::Positive, {"good", "good"}});

  TrainOptions opt;
  opt.steps = 60;
  opt.alpha = 0.1;
  opt.lambda = 0.01;

  SeededRng rng_a(12);
  TrainStats stats_a;
  Weights wa = train_ranker(corpus, tables, fs, opt, rng_a, &stats_a);
  CHECK(stats_a.steps == 60);
  CHECK(stats_a.skipped == 0);
  CHECK(stats_a.trace.size() == 60);
  for (double p : wa.psi) CHECK(std::isfinite(p));

  SeededRng rng_b(12);
  Weights wb = train_ranker(corpus, tables, fs, opt, rng_b);
  CHECK(wa.psi == wb.psi);
  CHECK(wa.gsq == wb.gsq);

  // zero steps: untouched weights
  SeededRng rng_c(12);
  TrainOptions none = opt;
  none.steps = 0;
  Weights wc = train_ranker(corpus, tables, fs, none, rng_c);
  CHECK(wc.psi == std::vector<double>(fs.size(), 0.0));
  CHECK(wc.gsq == std::vector<double>(fs.size(), 0.0));

  // instances whose beam never contains the gold label are skipped
  Corpus oov;
  oov.sentences.push_back({Polarity::Positive, {"zzz"}});
  SeededRng rng_d(12);
  TrainStats stats_d;
  TrainOptions few = opt;
  few.steps = 10;
  Weights wd = train_ranker(oov, tables, fs, few, rng_d, &stats_d);
  CHECK(stats_d.skipped == 10);
  CHECK(wd.psi == std::vector<double>(fs.size(), 0.0));

  // option validation
  SeededRng rng_e(1);
  TrainOptions bad = opt;
  bad.steps = -1;
  CHECK_THROWS_AS(train_ranker(corpus, tables, fs, bad, rng_e), ConfigError);
  bad = opt;
  bad.beam = 0;
  CHECK_THROWS_AS(train_ranker(corpus, tables, fs, bad, rng_e), ConfigError);
  bad = opt;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(train_ranker(corpus, tables, fs, bad, rng_e), ConfigError);
  bad = opt;
  bad.lambda = -0.5;
  CHECK_THROWS_AS(train_ranker(corpus, tables, fs, bad, rng_e), ConfigError);
  Corpus empty;
  CHECK_THROWS_AS(train_ranker(empty, tables, fs, opt, rng_e), ConfigError);
}

TEST_CASE("training separates a decidable toy problem") {
  // two readings of 'not good': the ranker should learn to prefer the
  // negation reading, matching the gold negative label
  Grammar g = worked_grammar();
  ParserTables tables(g);
  FeatureSpace fs(g);

  Corpus corpus;
  corpus.sentences.push_back({Polarity::Negative, {"not", "good"}});

  TrainOptions opt;
  opt.steps = 200;
  opt.alpha = 0.1;
  opt.lambda = 0.0;
  SeededRng rng(5);
  Weights w = train_ranker(corpus, tables, fs, opt, rng);

  RuleScores rs = make_rule_scores(fs, w);
  DecodeResult r = decode(tables, rs, {"not", "good"}, {});
  CHECK(r.label == Polarity::Negative);
  REQUIRE(r.k_best.size() == 2);
  CHECK(*tree_label(r.k_best[0]) == Polarity::Negative);
  // the combination feature carries positive weight now
  CHECK(w.psi[FeatureSpace::kCombHit] > 0.0);
  CHECK(w.psi[fs.comb_feature(0)] > 0.0);
}
