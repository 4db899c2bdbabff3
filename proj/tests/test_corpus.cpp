#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sentiparse/corpus.h"
#include "sentiparse/errors.h"
#include "sentiparse/text.h"

using namespace sentiparse;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> list) {
  return {list.begin(), list.end()};
}

// message-substring assertion for typed errors
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

TEST_CASE("tokenize: lowercasing, punctuation peeling, clitic split") {
  CHECK(tokenize("The movie is good.") == toks({"the", "movie", "is", "good", "."}));
  CHECK(tokenize("it's flawed") == toks({"it", "'", "s", "flawed"}));
  CHECK(tokenize("GOOD!!!") == toks({"good", "!", "!", "!"}));
  CHECK(tokenize("(great)") == toks({"(", "great", ")"}));
  CHECK(tokenize("don't  stop") == toks({"don't", "stop"}));
  CHECK(tokenize("...") == toks({".", ".", "."}));
  CHECK(tokenize("  spaced\tout\n") == toks({"spaced", "out"}));
  CHECK(tokenize("").empty());
  CHECK(tokenize("a's") == toks({"a", "'", "s"}));
}

TEST_CASE("normalize_text rejects malformed UTF-8") {
  CHECK(normalize_text("plain ascii") == "plain ascii");
  CHECK(normalize_text("caf\xc3\xa9") == "caf\xc3\xa9");
  CHECK_THROWS_AS(normalize_text("bad \x80 byte"), ParseError);
  CHECK_THROWS_AS(normalize_text("truncated \xc3"), ParseError);
  CHECK_THROWS_AS(tokenize("bad \xff"), ParseError);
}

TEST_CASE("load_corpus parses labels, skips comments and blank lines") {
  std::istringstream in(
      "# header comment\n"
      "1\tGood film.\n"
      "\n"
      "0\tBad film\r\n"
      "neg\tawful stuff\n"
      "pos\tIt's nice\n");
  Corpus c = load_corpus(in, "mem");
  REQUIRE(c.size() == 4);
  CHECK(c.sentences[0].label == Polarity::Positive);
  CHECK(c.sentences[0].tokens == toks({"good", "film", "."}));
  CHECK(c.sentences[1].label == Polarity::Negative);
  CHECK(c.sentences[1].tokens == toks({"bad", "film"}));
  CHECK(c.sentences[2].label == Polarity::Negative);
  CHECK(c.sentences[3].tokens == toks({"it", "'", "s", "nice"}));
  CHECK(c.count(Polarity::Negative) == 2);
  CHECK(c.count(Polarity::Positive) == 2);
}

TEST_CASE("load_corpus errors carry name and line number") {
  {
    std::istringstream in("1\tfine\nno tab here\n");
    auto msg = thrown_message<ParseError>([&] { load_corpus(in, "demo"); });
    CHECK(msg.find("demo:2") != std::string::npos);
    CHECK(msg.find("TAB") != std::string::npos);
  }
  {
    std::istringstream in("# c\n\n2\toops\n");
    auto msg = thrown_message<ParseError>([&] { load_corpus(in, "demo"); });
    CHECK(msg.find("demo:3") != std::string::npos);
    CHECK(msg.find("unknown label '2'") != std::string::npos);
  }
  {
    std::istringstream in("1\t\n");
    auto msg = thrown_message<ParseError>([&] { load_corpus(in, "demo"); });
    CHECK(msg.find("demo:1") != std::string::npos);
    CHECK(msg.find("empty sentence") != std::string::npos);
  }
  {
    std::istringstream in("1\tbad \x80 text\n");
    auto msg = thrown_message<ParseError>([&] { load_corpus(in, "demo"); });
    CHECK(msg.find("demo:1") != std::string::npos);
    CHECK(msg.find("UTF-8") != std::string::npos);
  }
  CHECK_THROWS_AS(load_corpus_file("/nonexistent/corpus.tsv"), ParseError);
}

TEST_CASE("balance downsamples the majority class in place") {
  Corpus c;
  for (int i = 0; i < 6; ++i) {
    c.sentences.push_back({Polarity::Negative, {"n" + std::to_string(i)}});
  }
  for (int i = 0; i < 4; ++i) {
    c.sentences.push_back({Polarity::Positive, {"p" + std::to_string(i)}});
  }
  // interleave a little so order preservation is meaningful
  std::swap(c.sentences[1], c.sentences[7]);
  std::swap(c.sentences[3], c.sentences[9]);

  SeededRng rng(7);
  Corpus b = balance(c, rng);
  CHECK(b.count(Polarity::Negative) == 4);
  CHECK(b.count(Polarity::Positive) == 4);

  // result must be a subsequence of the input
  size_t at = 0;
  for (const auto& s : b.sentences) {
    while (at < c.size() && !(c.sentences[at].label == s.label &&
                              c.sentences[at].tokens == s.tokens)) {
      ++at;
    }
    REQUIRE(at < c.size());
    ++at;
  }

  // no-op on balanced input, order untouched
  SeededRng rng2(7);
  Corpus again = balance(b, rng2);
  REQUIRE(again.size() == b.size());
  for (size_t i = 0; i < b.size(); ++i) {
    CHECK(again.sentences[i].tokens == b.sentences[i].tokens);
  }

  // determinism for a fixed seed
  SeededRng rng3(7);
  Corpus b2 = balance(c, rng3);
  REQUIRE(b2.size() == b.size());
  for (size_t i = 0; i < b.size(); ++i) {
    CHECK(b2.sentences[i].tokens == b.sentences[i].tokens);
  }
}

TEST_CASE("kfold: stratified partition with disjoint test sets") {
  Corpus c;
  for (int i = 0; i < 13; ++i) {
    c.sentences.push_back({Polarity::Negative, {"n" + std::to_string(i)}});
  }
  for (int i = 0; i < 12; ++i) {
    c.sentences.push_back({Polarity::Positive, {"p" + std::to_string(i)}});
  }
  SeededRng rng(3);
  auto folds = kfold(c, 5, rng);
  REQUIRE(folds.size() == 5);

  std::vector<std::string> seen;
  for (const auto& f : folds) {
    CHECK(f.train.size() + f.test.size() == c.size());
    // class counts per test fold stay within one of an even split
    size_t tn = f.test.count(Polarity::Negative);
    size_t tp = f.test.count(Polarity::Positive);
    CHECK(tn >= 2);
    CHECK(tn <= 3);
    CHECK(tp >= 2);
    CHECK(tp <= 3);
    for (const auto& s : f.test.sentences) seen.push_back(s.tokens[0]);
    // train and test are disjoint
    for (const auto& s : f.test.sentences) {
      for (const auto& t : f.train.sentences) {
        CHECK(t.tokens != s.tokens);
      }
    }
  }
  // test folds cover every sentence exactly once
  std::sort(seen.begin(), seen.end());
  CHECK(std::unique(seen.begin(), seen.end()) == seen.end());
  CHECK(seen.size() == c.size());

  SeededRng rng_a(3);
  auto folds_a = kfold(c, 5, rng_a);
  for (size_t f = 0; f < folds.size(); ++f) {
    REQUIRE(folds_a[f].test.size() == folds[f].test.size());
    for (size_t i = 0; i < folds[f].test.size(); ++i) {
      CHECK(folds_a[f].test.sentences[i].tokens == folds[f].test.sentences[i].tokens);
    }
  }

  SeededRng rng_err(1);
  CHECK_THROWS_AS(kfold(c, 1, rng_err), ConfigError);
  CHECK_THROWS_AS(kfold(c, 26, rng_err), ConfigError);
}
