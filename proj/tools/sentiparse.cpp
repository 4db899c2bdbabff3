// sentiparse: grammar induction, reranker training, classification and
// cross-validation over polarity-labeled sentence corpora.
//
// exit codes: 0 ok, 2 input/parse error, 3 configuration error,
// 4 broken invariant / evaluation contradiction

#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sentiparse/config.h"
#include "sentiparse/corpus.h"
#include "sentiparse/errors.h"
#include "sentiparse/grammar.h"
#include "sentiparse/induction.h"
#include "sentiparse/parser.h"
#include "sentiparse/polarity.h"
#include "sentiparse/ranking.h"
#include "sentiparse/rng.h"
#include "sentiparse/text.h"

namespace sp = sentiparse;

namespace {

sp::Corpus load_labeled(const std::string& path, const std::string& what) {
  if (path.empty()) throw sp::ConfigError(what + ": --corpus is required");
  sp::Corpus c = sp::load_corpus_file(path);
  if (c.size() == 0) throw sp::ParseError(path + ": empty corpus");
  return c;
}

void need(const std::string& value, const std::string& what) {
  if (value.empty()) throw sp::ConfigError(what);
}

int64_t ranker_steps(const sp::RunConfig& cfg, bool iters_given, size_t corpus_size) {
  if (iters_given) return cfg.iters;
  if (cfg.epochs < 0) throw sp::ConfigError("--epochs must be non-negative");
  return static_cast<int64_t>(cfg.epochs) * static_cast<int64_t>(corpus_size);
}

void write_diagnostics(const std::string& path, const sp::LearnDiagnostics& diag) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sp::ConfigError("cannot write diagnostics file: " + path);
  for (size_t t = 0; t < diag.dict_sizes.size(); ++t) {
    out << "iteration=" << (t + 1) << "\tdict=" << diag.dict_sizes[t]
        << "\tcomb=" << diag.comb_sizes[t] << "\n";
  }
  for (const auto& r : diag.rules) {
    out << "rule\t" << r.id;
    for (int t = 0; t < sp::kRuleTypeCount; ++t) {
      out << '\t' << sp::rule_type_name(static_cast<sp::RuleType>(t)) << '='
          << r.type_counts[t];
    }
    out << "\tpairs=" << r.pairs << "\tkept=" << (r.kept ? 1 : 0)
        << "\tconverged=" << (r.converged ? 1 : 0)
        << "\tcost=" << sp::format_double(r.cost) << "\n";
  }
  out.flush();
  if (!out) throw sp::ConfigError("failed writing diagnostics file: " + path);
}

int run_learn(const sp::RunConfig& cfg) {
  need(cfg.out, "learn-grammar: --out is required");
  sp::Corpus corpus = load_labeled(cfg.corpus, "learn-grammar");
  sp::SeededRng rng(cfg.seed);
  sp::LearnDiagnostics diag;
  sp::Grammar g = sp::learn_grammar(corpus, cfg.induction(), rng, &diag, &std::cerr);
  g.save_file(cfg.out);
  write_diagnostics(cfg.out + ".diag", diag);
  cfg.save_file(cfg.out + ".config");
  std::cerr << "[learn-grammar] |G_D| = " << g.dictionary().size() << ", |G_C| = "
            << g.combinations().size() << ", wrote " << cfg.out << "\n";
  return 0;
}

int run_train(const sp::RunConfig& cfg, bool iters_given, bool epochs_given) {
  if (iters_given && epochs_given) {
    throw sp::ConfigError("train: --iters and --epochs are mutually exclusive");
  }
  need(cfg.grammar, "train: --grammar is required");
  need(cfg.out, "train: --out is required");
  sp::Corpus corpus = load_labeled(cfg.corpus, "train");
  sp::Grammar g = sp::Grammar::load_file(cfg.grammar);
  sp::ParserTables tables(g);
  sp::FeatureSpace fs(g);

  sp::TrainOptions topt;
  topt.beam = cfg.beam;
  topt.steps = ranker_steps(cfg, iters_given, corpus.size());
  topt.alpha = cfg.alpha;
  topt.lambda = cfg.lambda;
  sp::SeededRng rng(cfg.seed);
  sp::TrainStats stats;
  sp::Weights w = sp::train_ranker(corpus, tables, fs, topt, rng, &stats, &std::cerr);
  w.save_file(cfg.out, fs);
  cfg.save_file(cfg.out + ".config");

  sp::RuleScores rs = sp::make_rule_scores(fs, w);
  sp::DecodeOptions dopt;
  dopt.k = cfg.beam;
  dopt.fallback = cfg.fallback;
  size_t correct = 0;
  for (const auto& s : corpus.sentences) {
    if (sp::decode(tables, rs, s.tokens, dopt).label == s.label) ++correct;
  }
  std::cerr << "[train] steps=" << stats.steps << " skipped=" << stats.skipped
            << " training accuracy "
            << sp::format_double(static_cast<double>(correct) /
                                 static_cast<double>(corpus.size()))
            << ", wrote " << cfg.out << "\n";
  return 0;
}

int run_classify(const sp::RunConfig& cfg) {
  need(cfg.grammar, "classify: --grammar is required");
  sp::Grammar g = sp::Grammar::load_file(cfg.grammar);
  sp::ParserTables tables(g);
  sp::FeatureSpace fs(g);
  sp::Weights w = cfg.weights.empty() ? sp::Weights::zeros(fs.size())
                                      : sp::Weights::load_file(cfg.weights, fs);
  sp::RuleScores rs = sp::make_rule_scores(fs, w);
  sp::DecodeOptions dopt;
  dopt.k = cfg.beam;
  dopt.fallback = cfg.fallback;

  std::ifstream file_in;
  std::string in_name = "stdin";
  if (!cfg.corpus.empty()) {
    file_in.open(cfg.corpus, std::ios::binary);
    if (!file_in) throw sp::ConfigError("cannot read input file: " + cfg.corpus);
    in_name = cfg.corpus;
  }
  std::istream& in = cfg.corpus.empty() ? std::cin : file_in;

  std::ofstream file_out;
  if (!cfg.out.empty()) {
    file_out.open(cfg.out, std::ios::binary);
    if (!file_out) throw sp::ConfigError("cannot write output file: " + cfg.out);
    cfg.save_file(cfg.out + ".config");
  }
  std::ostream& out = cfg.out.empty() ? std::cout : file_out;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> tokens;
    try {
      tokens = sp::tokenize(sp::normalize_text(line));
    } catch (const sp::ParseError& e) {
      throw sp::ParseError(in_name + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (tokens.empty()) {
      std::cerr << "[classify] warning: skipping empty line " << lineno << "\n";
      continue;
    }
    sp::DecodeResult res = sp::decode(tables, rs, tokens, dopt);
    out << sp::polarity_name(res.label) << '\t';
    if (res.best) {
      out << sp::format_double(res.best->dist.p_neg) << '\t'
          << sp::format_double(res.best->dist.p_pos) << "\t-";
    } else {
      out << "-\t-\tno-evidence";
    }
    if (cfg.trees) {
      out << '\t' << (res.best ? sp::bracket_tree(*res.best, tokens) : "-");
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw sp::ConfigError("failed writing classification output");
  return 0;
}

struct FoldResult {
  size_t train_size = 0;
  size_t test_size = 0;
  size_t dict_rules = 0;
  size_t comb_rules = 0;
  size_t correct = 0;
  size_t no_evidence = 0;
  size_t baseline_correct = 0;
  int64_t skipped = 0;
  // confusion over (gold, predicted)
  int64_t tn = 0, fp = 0, fn = 0, tp = 0;
};

FoldResult run_fold(const sp::Fold& fold, const sp::RunConfig& cfg, bool iters_given,
                    uint64_t fold_seed) {
  FoldResult r;
  sp::SeededRng rng(fold_seed);
  sp::Corpus train = sp::balance(fold.train, rng);
  r.train_size = train.size();
  r.test_size = fold.test.size();

  sp::Grammar g = sp::learn_grammar(train, cfg.induction(), rng, nullptr, nullptr);
  r.dict_rules = g.dictionary().size();
  r.comb_rules = g.combinations().size();
  sp::ParserTables tables(g);
  sp::FeatureSpace fs(g);

  sp::TrainOptions topt;
  topt.beam = cfg.beam;
  topt.steps = ranker_steps(cfg, iters_given, train.size());
  topt.alpha = cfg.alpha;
  topt.lambda = cfg.lambda;
  sp::TrainStats stats;
  sp::Weights w = sp::train_ranker(train, tables, fs, topt, rng, &stats, nullptr);
  r.skipped = stats.skipped;

  // majority baseline from the unbalanced training fold, ties negative
  sp::Polarity majority =
      fold.train.count(sp::Polarity::Positive) > fold.train.count(sp::Polarity::Negative)
          ? sp::Polarity::Positive
          : sp::Polarity::Negative;

  sp::RuleScores rs = sp::make_rule_scores(fs, w);
  sp::DecodeOptions dopt;
  dopt.k = cfg.beam;
  dopt.fallback = cfg.fallback;
  for (const auto& s : fold.test.sentences) {
    sp::DecodeResult res = sp::decode(tables, rs, s.tokens, dopt);
    if (res.label == s.label) ++r.correct;
    if (res.no_evidence) ++r.no_evidence;
    if (majority == s.label) ++r.baseline_correct;
    if (s.label == sp::Polarity::Negative) {
      (res.label == sp::Polarity::Negative ? r.tn : r.fp) += 1;
    } else {
      (res.label == sp::Polarity::Positive ? r.tp : r.fn) += 1;
    }
  }
  return r;
}

int run_evaluate(const sp::RunConfig& cfg, bool iters_given) {
  sp::Corpus corpus = load_labeled(cfg.corpus, "evaluate");
  if (cfg.threads < 1) throw sp::ConfigError("--threads must be at least 1");
  sp::SeededRng split_rng(cfg.seed);
  std::vector<sp::Fold> folds = sp::kfold(corpus, cfg.folds, split_rng);

  std::vector<FoldResult> results(folds.size());
  const int workers = std::min<int>(cfg.threads, static_cast<int>(folds.size()));
  if (workers <= 1) {
    for (size_t i = 0; i < folds.size(); ++i) {
      results[i] = run_fold(folds[i], cfg, iters_given, sp::derive_seed(cfg.seed, i));
      std::cerr << "[evaluate] fold " << (i + 1) << "/" << folds.size() << " accuracy "
                << sp::format_double(static_cast<double>(results[i].correct) /
                                     static_cast<double>(results[i].test_size))
                << "\n";
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::string> errors(folds.size());
    auto work = [&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= folds.size()) return;
        try {
          results[i] = run_fold(folds[i], cfg, iters_given, sp::derive_seed(cfg.seed, i));
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    for (size_t i = 0; i < folds.size(); ++i) {
      if (!errors[i].empty()) throw sp::ConfigError("fold " + std::to_string(i + 1) + ": " + errors[i]);
      std::cerr << "[evaluate] fold " << (i + 1) << "/" << folds.size() << " accuracy "
                << sp::format_double(static_cast<double>(results[i].correct) /
                                     static_cast<double>(results[i].test_size))
                << "\n";
    }
  }

  double mean_acc = 0.0;
  size_t tested = 0, correct = 0, no_evidence = 0, baseline = 0;
  int64_t tn = 0, fp = 0, fn = 0, tp = 0, skipped = 0;
  for (const FoldResult& r : results) {
    mean_acc += static_cast<double>(r.correct) / static_cast<double>(r.test_size);
    tested += r.test_size;
    correct += r.correct;
    no_evidence += r.no_evidence;
    baseline += r.baseline_correct;
    tn += r.tn;
    fp += r.fp;
    fn += r.fn;
    tp += r.tp;
    skipped += r.skipped;
  }
  mean_acc /= static_cast<double>(results.size());

  std::ofstream file_out;
  if (!cfg.out.empty()) {
    file_out.open(cfg.out, std::ios::binary);
    if (!file_out) throw sp::ConfigError("cannot write metrics file: " + cfg.out);
    cfg.save_file(cfg.out + ".config");
  }
  std::ostream& out = cfg.out.empty() ? std::cout : file_out;

  out << "folds=" << folds.size() << "\n";
  out << "sentences=" << corpus.size() << "\n";
  out << "mean_accuracy=" << sp::format_double(mean_acc) << "\n";
  out << "overall_accuracy="
      << sp::format_double(static_cast<double>(correct) / static_cast<double>(tested))
      << "\n";
  out << "baseline_accuracy="
      << sp::format_double(static_cast<double>(baseline) / static_cast<double>(tested))
      << "\n";
  out << "no_evidence_rate="
      << sp::format_double(static_cast<double>(no_evidence) / static_cast<double>(tested))
      << "\n";
  out << "confusion_tn=" << tn << "\n";
  out << "confusion_fp=" << fp << "\n";
  out << "confusion_fn=" << fn << "\n";
  out << "confusion_tp=" << tp << "\n";
  out << "train_skipped=" << skipped << "\n";
  for (size_t i = 0; i < results.size(); ++i) {
    const FoldResult& r = results[i];
    out << "fold=" << (i + 1) << "\ttrain=" << r.train_size << "\ttest=" << r.test_size
        << "\tdict_rules=" << r.dict_rules << "\tcomb_rules=" << r.comb_rules
        << "\taccuracy="
        << sp::format_double(static_cast<double>(r.correct) /
                             static_cast<double>(r.test_size))
        << "\tno_evidence=" << r.no_evidence << "\n";
  }
  out.flush();
  if (!out) throw sp::ConfigError("failed writing metrics output");
  return 0;
}

int run_inspect(const sp::RunConfig& cfg, const std::string& query) {
  need(cfg.grammar, "inspect: --grammar is required");
  sp::Grammar g = sp::Grammar::load_file(cfg.grammar);

  if (query.find("→") != std::string::npos) {
    for (const sp::CombinationRule& rule : g.combinations()) {
      if (rule.id() != query) continue;
      std::cout << "rule=" << rule.id() << "\n";
      std::cout << "type=" << sp::rule_type_name(rule.type) << "\n";
      for (int t = 0; t < sp::kRuleTypeCount; ++t) {
        std::cout << sp::rule_type_name(static_cast<sp::RuleType>(t)) << "="
                  << rule.type_counts[t] << "\n";
      }
      std::cout << "theta=";
      for (size_t k = 0; k < rule.theta.size(); ++k) {
        std::cout << (k ? "," : "") << sp::format_double(rule.theta[k]);
      }
      std::cout << "\n";
      // response sampled over slot confidence; second slot pinned to 0.5
      // when present, then the mirror curve
      const int slots = rule.slot_count();
      for (int curve = 0; curve < slots; ++curve) {
        for (int k = 0; k <= 10; ++k) {
          double p = static_cast<double>(k) / 10.0;
          double probs[2] = {0.5, 0.5};
          probs[curve] = p;
          sp::PolarityDist d = sp::eval_combination(rule, probs, slots);
          std::cout << "curve" << (curve + 1) << "\t" << sp::format_double(p) << "\t"
                    << sp::format_double(d.prob(rule.lhs)) << "\n";
        }
      }
      return 0;
    }
    std::cout << "rule not found: " << query << "\n";
    return 0;
  }

  std::vector<std::string> tokens = sp::tokenize(sp::normalize_text(query));
  if (tokens.empty()) throw sp::ConfigError("inspect: empty query");
  int idx = g.find_fragment(tokens, 0, tokens.size());
  if (idx < 0) {
    std::cout << "fragment not found: " << sp::join_tokens(tokens, 0, tokens.size())
              << "\n";
    return 0;
  }
  const sp::DictionaryRule& rule = g.dictionary()[idx];
  std::cout << "fragment=" << rule.fragment_string() << "\n";
  std::cout << "lhs=" << sp::polarity_char(rule.lhs) << "\n";
  std::cout << "stored_p_neg=" << sp::format_double(rule.dist.p_neg)
            << "\tstored_p_pos=" << sp::format_double(rule.dist.p_pos)
            << "\tstored_count_neg=" << rule.count_neg
            << "\tstored_count_pos=" << rule.count_pos << "\n";

  // the naive side recounts the corpus with negation awareness disabled
  sp::Corpus corpus = load_labeled(cfg.corpus, "inspect");
  sp::FragmentCounts naive =
      sp::FragmentCounts::count(corpus, {}, g.l_max(), 1, false);
  const sp::FragmentStats* st = naive.find(sp::join_tokens(tokens, 0, tokens.size()));
  int64_t cn = st ? st->n : 0;
  int64_t cp = st ? st->p : 0;
  const int64_t s_n = corpus.count(sp::Polarity::Negative);
  const int64_t s_p = corpus.count(sp::Polarity::Positive);
  const double total = static_cast<double>(s_n + s_p);
  const double w_n = s_n > 0 ? total / (2.0 * static_cast<double>(s_n)) : 1.0;
  const double w_p = s_p > 0 ? total / (2.0 * static_cast<double>(s_p)) : 1.0;
  const double wn_cn = w_n * static_cast<double>(cn);
  const double wp_cp = w_p * static_cast<double>(cp);
  const double den = wn_cn + wp_cp + 2.0;
  std::cout << "naive_p_neg=" << sp::format_double((wn_cn + 1.0) / den)
            << "\tnaive_p_pos=" << sp::format_double((wp_cp + 1.0) / den)
            << "\tnaive_count_neg=" << cn << "\tnaive_count_pos=" << cp << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentiment grammar induction and chart parsing"};
  app.require_subcommand(1);

  sp::RunConfig cfg;
  std::string fallback_str = "neg";
  std::string query;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", cfg.corpus, "labeled corpus TSV (raw text lines for classify)");
    cmd->add_option("--grammar", cfg.grammar, "grammar file path");
    cmd->add_option("--weights", cfg.weights, "weights file path");
    cmd->add_option("--out", cfg.out, "primary output path (default: stdout where applicable)");
    cmd->add_option("--lmax", cfg.l_max, "maximum fragment length");
    cmd->add_option("--tau-f", cfg.tau_f, "minimum fragment frequency");
    cmd->add_option("--tau-p", cfg.tau_p, "slot replacement confidence, strict");
    cmd->add_option("--tau-delta", cfg.tau_delta, "strengthen/weaken margin");
    cmd->add_option("--tau-r", cfg.tau_r, "minimum combination rule count, strict");
    cmd->add_option("--tau-c", cfg.tau_c, "combination type purity, strict");
    cmd->add_option("--tau-c2", cfg.tau_c2, "slot confidence floor during decoding, strict");
    cmd->add_option("--beam", cfg.beam, "K-best beam width");
    cmd->add_option("--epochs", cfg.epochs, "ranker passes over the corpus");
    cmd->add_option("--alpha", cfg.alpha, "AdaGrad learning rate");
    cmd->add_option("--lambda", cfg.lambda, "L2 regularizer");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--folds", cfg.folds, "cross-validation folds");
    cmd->add_option("--threads", cfg.threads, "worker threads for evaluate");
    cmd->add_flag("--trees", cfg.trees, "emit bracketed derivations");
    cmd->add_option("--fallback-label", fallback_str, "label for no-evidence inputs: neg|pos");
  };

  CLI::App* learn = app.add_subcommand("learn-grammar", "induce a grammar from a labeled corpus");
  add_common(learn);
  learn->add_option("--iters", cfg.iterations, "induction iterations T");

  CLI::App* train = app.add_subcommand("train", "train reranker weights against a grammar");
  add_common(train);
  CLI::Option* train_iters =
      train->add_option("--iters", cfg.iters, "total sampled training steps S");

  CLI::App* classify = app.add_subcommand("classify", "label raw sentences");
  add_common(classify);

  CLI::App* evaluate = app.add_subcommand("evaluate", "k-fold cross-validation");
  add_common(evaluate);
  CLI::Option* eval_iters =
      evaluate->add_option("--iters", cfg.iters, "total sampled training steps S per fold");

  CLI::App* inspect = app.add_subcommand("inspect", "inspect a fragment or rule");
  add_common(inspect);
  inspect->add_option("query", query, "fragment text or rule identifier")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }

  try {
    auto fb = sp::parse_polarity(fallback_str);
    if (!fb) throw sp::ConfigError("bad --fallback-label: '" + fallback_str + "'");
    cfg.fallback = *fb;

    if (learn->parsed()) {
      cfg.command = "learn-grammar";
      return run_learn(cfg);
    }
    if (train->parsed()) {
      cfg.command = "train";
      bool epochs_given = train->count("--epochs") > 0;
      return run_train(cfg, train_iters->count() > 0, epochs_given);
    }
    if (classify->parsed()) {
      cfg.command = "classify";
      return run_classify(cfg);
    }
    if (evaluate->parsed()) {
      cfg.command = "evaluate";
      bool epochs_given = evaluate->count("--epochs") > 0;
      if (eval_iters->count() > 0 && epochs_given) {
        throw sp::ConfigError("evaluate: --iters and --epochs are mutually exclusive");
      }
      return run_evaluate(cfg, eval_iters->count() > 0);
    }
    cfg.command = "inspect";
    return run_inspect(cfg, query);
  } catch (const sp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sp::EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const sp::InternalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
