#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sentiparse/errors.h"
#include "sentiparse/grammar.h"
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

CombinationRule comb_rule(Polarity lhs, RuleType type, std::vector<PatternElem> pat,
                          std::vector<double> theta) {
  CombinationRule c;
  c.lhs = lhs;
  c.type = type;
  c.pattern = std::move(pat);
  c.theta = std::move(theta);
  return c;
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

TEST_CASE("polarity helpers") {
  CHECK(opposite(Polarity::Negative) == Polarity::Positive);
  CHECK(opposite(opposite(Polarity::Positive)) == Polarity::Positive);
  CHECK(to_nonterminal(Polarity::Negative) == NonTerminal::N);
  CHECK(nonterminal_char(NonTerminal::S) == 'S');
  CHECK(polarity_char(Polarity::Positive) == 'P');
  CHECK(*parse_polarity("neg") == Polarity::Negative);
  CHECK(!parse_polarity("positive"));
}

TEST_CASE("rule identifiers and pattern strings") {
  auto d = dict_rule(Polarity::Positive, {"good", "movie"}, 0.9);
  CHECK(d.fragment_string() == "good movie");
  CHECK(d.id() == "P→good movie");

  auto c = comb_rule(Polarity::Negative, RuleType::Negation,
                     {PatternElem::term("not"), PatternElem::slot_of(Polarity::Positive)},
                     {0.0, 0.0});
  CHECK(c.pattern_string() == "not [P]");
  CHECK(c.id() == "N→not [P]");
  CHECK(c.slot_count() == 1);
  CHECK(c.terminal_count() == 1);
  CHECK(c.slot_positions()[0] == 1);
  CHECK(c.slot_positions()[1] == -1);
  REQUIRE(c.first_terminal() != nullptr);
  CHECK(*c.first_terminal() == "not");

  auto two = comb_rule(Polarity::Positive, RuleType::Contrast,
                       {PatternElem::slot_of(Polarity::Negative), PatternElem::term("but"),
                        PatternElem::slot_of(Polarity::Positive)},
                       {0.0, 0.0, 0.0});
  CHECK(two.pattern_string() == "[N] but [P]");
  CHECK(two.slot_positions()[0] == 0);
  CHECK(two.slot_positions()[1] == 2);
}

TEST_CASE("randomized save/load round-trip is the identity") {
  SeededRng rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    Grammar g = sentitest::random_grammar(rng);
    std::ostringstream out;
    g.save(out);
    std::istringstream in(out.str());
    Grammar back = Grammar::load(in, "roundtrip");
    CHECK(back == g);
    CHECK(back.l_max() == g.l_max());
    CHECK(back.tau_c2() == g.tau_c2());

    // saving again produces identical bytes
    std::ostringstream out2;
    back.save(out2);
    CHECK(out2.str() == out.str());
  }
}

TEST_CASE("grammar validation rejects malformed rules") {
  auto good = dict_rule(Polarity::Positive, {"good"}, 0.8);
  auto bad = dict_rule(Polarity::Negative, {"bad"}, 0.7);

  SUBCASE("duplicate fragment") {
    auto msg = thrown_message<ConfigError>(
        [&] { Grammar({good, good}, {}, 7, 0.5); });
    CHECK(msg.find("duplicate dictionary fragment") != std::string::npos);
  }
  SUBCASE("tied distribution") {
    auto tied = good;
    tied.dist = {0.5, 0.5};
    auto msg = thrown_message<ConfigError>([&] { Grammar({tied}, {}, 7, 0.5); });
    CHECK(msg.find("tied") != std::string::npos);
  }
  SUBCASE("lhs disagrees with argmax") {
    auto wrong = good;
    wrong.lhs = Polarity::Negative;
    auto msg = thrown_message<ConfigError>([&] { Grammar({wrong}, {}, 7, 0.5); });
    CHECK(msg.find("argmax") != std::string::npos);
  }
  SUBCASE("invalid distribution") {
    auto inv = good;
    inv.dist = {0.7, 0.7};
    CHECK_THROWS_AS(Grammar({inv}, {}, 7, 0.5), ConfigError);
  }
  SUBCASE("stop-only fragment") {
    auto stop = dict_rule(Polarity::Negative, {"not", "the"}, 0.9);
    auto msg = thrown_message<ConfigError>([&] { Grammar({stop}, {}, 7, 0.5); });
    CHECK(msg.find("stop") != std::string::npos);
  }
  SUBCASE("fragment longer than l_max") {
    auto frag = dict_rule(Polarity::Positive, {"a", "b", "c"}, 0.8);
    CHECK_THROWS_AS(Grammar({frag}, {}, 2, 0.5), ConfigError);
  }
  SUBCASE("negative count") {
    auto neg = good;
    neg.count_pos = -1;
    CHECK_THROWS_AS(Grammar({neg}, {}, 7, 0.5), ConfigError);
  }
  SUBCASE("bad l_max and tau_c2") {
    CHECK_THROWS_AS(Grammar({good}, {}, 0, 0.5), ConfigError);
    CHECK_THROWS_AS(Grammar({good}, {}, 7, 0.4), ConfigError);
    CHECK_THROWS_AS(Grammar({good}, {}, 7, 1.5), ConfigError);
  }
  SUBCASE("adjacent slots") {
    auto c = comb_rule(Polarity::Negative, RuleType::Contrast,
                       {PatternElem::slot_of(Polarity::Negative),
                        PatternElem::slot_of(Polarity::Positive), PatternElem::term("x")},
                       {0.0, 0.0, 0.0});
    auto msg = thrown_message<ConfigError>([&] { Grammar({good, bad}, {c}, 7, 0.5); });
    CHECK(msg.find("adjacent slots") != std::string::npos);
  }
  SUBCASE("no terminal") {
    auto c = comb_rule(Polarity::Negative, RuleType::Negation,
                       {PatternElem::slot_of(Polarity::Positive)}, {0.0, 0.0});
    auto msg = thrown_message<ConfigError>([&] { Grammar({good}, {c}, 7, 0.5); });
    CHECK(msg.find("terminal") != std::string::npos);
  }
  SUBCASE("contrast arity and slot polarity") {
    auto one = comb_rule(Polarity::Positive, RuleType::Contrast,
                         {PatternElem::term("but"), PatternElem::slot_of(Polarity::Positive)},
                         {0.0, 0.0});
    CHECK_THROWS_AS(Grammar({good}, {one}, 7, 0.5), ConfigError);

    auto same = comb_rule(Polarity::Positive, RuleType::Contrast,
                          {PatternElem::slot_of(Polarity::Positive), PatternElem::term("but"),
                           PatternElem::slot_of(Polarity::Positive)},
                          {0.0, 0.0, 0.0});
    auto msg = thrown_message<ConfigError>([&] { Grammar({good}, {same}, 7, 0.5); });
    CHECK(msg.find("differ") != std::string::npos);

    auto negation_two =
        comb_rule(Polarity::Negative, RuleType::Negation,
                  {PatternElem::slot_of(Polarity::Negative), PatternElem::term("x"),
                   PatternElem::slot_of(Polarity::Positive)},
                  {0.0, 0.0, 0.0});
    CHECK_THROWS_AS(Grammar({good}, {negation_two}, 7, 0.5), ConfigError);
  }
  SUBCASE("theta shape") {
    auto c = comb_rule(Polarity::Negative, RuleType::Negation,
                       {PatternElem::term("not"), PatternElem::slot_of(Polarity::Positive)},
                       {0.0});
    CHECK_THROWS_AS(Grammar({good}, {c}, 7, 0.5), ConfigError);
    auto nan_rule = comb_rule(Polarity::Negative, RuleType::Negation,
                              {PatternElem::term("not"), PatternElem::slot_of(Polarity::Positive)},
                              {0.0, std::nan("")});
    CHECK_THROWS_AS(Grammar({good}, {nan_rule}, 7, 0.5), ConfigError);
  }
  SUBCASE("duplicate combination rule") {
    auto c = comb_rule(Polarity::Negative, RuleType::Negation,
                       {PatternElem::term("not"), PatternElem::slot_of(Polarity::Positive)},
                       {0.0, -1.0});
    auto msg =
        thrown_message<ConfigError>([&] { Grammar({good}, {c, c}, 7, 0.5); });
    CHECK(msg.find("duplicate combination rule") != std::string::npos);
  }
}

TEST_CASE("grammar load reports file name and line") {
  auto load_str = [](const std::string& text) {
    std::istringstream in(text);
    return Grammar::load(in, "g");
  };

  {
    auto msg = thrown_message<ParseError>([&] { load_str("nonsense\n"); });
    CHECK(msg.find("g:1") != std::string::npos);
    CHECK(msg.find("header") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>([&] { load_str("sgrammar v1 lmax=7 zip=1\n"); });
    CHECK(msg.find("unknown header field") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>([&] { load_str("sgrammar v1 tauc2=0.6\n"); });
    CHECK(msg.find("lmax") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>(
        [&] { load_str("sgrammar v1 lmax=7\nD P no tab\n"); });
    CHECK(msg.find("g:2") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>(
        [&] { load_str("sgrammar v1 lmax=7\nD X 0.2 0.8 0 0\tgood\n"); });
    CHECK(msg.find("g:2") != std::string::npos);
    CHECK(msg.find("lhs") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>(
        [&] { load_str("sgrammar v1 lmax=7\nD P zz 0.8 0 0\tgood\n"); });
    CHECK(msg.find("p_neg") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>(
        [&] { load_str("sgrammar v1 lmax=7\nC P sideways 0,0\tvery [P]\n"); });
    CHECK(msg.find("unknown rule type") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>([&] {
      load_str("sgrammar v1 lmax=7\nC P strengthen 0,0\tvery [P]\tn=1,s=2,w=3\n");
    });
    CHECK(msg.find("n=..,s=..,w=..,c=..") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>(
        [&] { load_str("sgrammar v1 lmax=7\nQ what\tis this\n"); });
    CHECK(msg.find("unknown line kind") != std::string::npos);
  }
  {
    auto msg = thrown_message<ParseError>([&] { load_str(""); });
    CHECK(msg.find("empty grammar file") != std::string::npos);
  }
  {
    // structural problems surface as parse errors naming the file
    auto msg = thrown_message<ParseError>([&] {
      load_str("sgrammar v1 lmax=7\nD P 0.2 0.8 0 0\tgood\nD P 0.3 0.7 0 0\tgood\n");
    });
    CHECK(msg.find("g:") != std::string::npos);
    CHECK(msg.find("duplicate dictionary fragment") != std::string::npos);
  }
  CHECK_THROWS_AS(Grammar::load_file("/nonexistent/grammar"), ParseError);

  // a well-formed file loads and validates
  Grammar ok = load_str(
      "sgrammar v1 lmax=5 tauc2=0.6\n"
      "D P 0.2 0.8 1 9\tgood\n"
      "D N 0.75 0.25 3 1\tbad\n"
      "C N negation 0.5,-2\tnot [P]\tn=4,s=0,w=0,c=0\n");
  CHECK(ok.l_max() == 5);
  CHECK(ok.tau_c2() == 0.6);
  REQUIRE(ok.dictionary().size() == 2);
  REQUIRE(ok.combinations().size() == 1);
  CHECK(ok.dictionary()[0].dist.p_pos == 0.8);
  CHECK(ok.combinations()[0].type == RuleType::Negation);
  CHECK(ok.combinations()[0].type_counts[0] == 4);
}

TEST_CASE("fragment lookup, anchors and vocabulary") {
  auto g = Grammar(
      {dict_rule(Polarity::Positive, {"good"}, 0.8),
       dict_rule(Polarity::Positive, {"good", "movie"}, 0.9),
       dict_rule(Polarity::Negative, {"bad"}, 0.7)},
      {comb_rule(Polarity::Negative, RuleType::Negation,
                 {PatternElem::term("not"), PatternElem::slot_of(Polarity::Positive)},
                 {0.0, -2.0}),
       comb_rule(Polarity::Positive, RuleType::Negation,
                 {PatternElem::term("not"), PatternElem::slot_of(Polarity::Negative)},
                 {0.0, -2.0}),
       comb_rule(Polarity::Positive, RuleType::Strengthen,
                 {PatternElem::term("very"), PatternElem::slot_of(Polarity::Positive)},
                 {0.0, 2.0})},
      7, 0.5);

  std::vector<std::string> sent = {"not", "a", "good", "movie"};
  CHECK(g.find_fragment(sent, 2, 4) == 1);
  CHECK(g.find_fragment(sent, 2, 3) == 0);
  CHECK(g.find_fragment(sent, 0, 2) == -1);
  CHECK(g.find_fragment_key("bad") == 2);
  CHECK(g.find_fragment_key("") == -1);

  const auto* by_not = g.combinations_anchored_by("not");
  REQUIRE(by_not != nullptr);
  CHECK(*by_not == std::vector<int>{0, 1});
  const auto* by_very = g.combinations_anchored_by("very");
  REQUIRE(by_very != nullptr);
  CHECK(*by_very == std::vector<int>{2});
  CHECK(g.combinations_anchored_by("never") == nullptr);

  CHECK(g.token_in_vocab("good"));
  CHECK(g.token_in_vocab("movie"));
  CHECK(!g.token_in_vocab("not"));   // only a combination terminal
  CHECK(!g.token_in_vocab("glorp"));
}
