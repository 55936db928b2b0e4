#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "support.hpp"
#include "toklab/engine.hpp"
#include "toklab/error.hpp"
#include "toklab/metrics.hpp"

namespace toklab {
namespace {

using testing::simple_definition;

template <typename F>
void expect_kind(ErrorKind kind, F&& f) {
  try {
    f();
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

TEST(Nsl, IdenticalListsGiveOne) {
  EXPECT_EQ(nsl({{3, 5, 7}, {3, 5, 7}}), (Ratio{1, 1}));
}

TEST(Nsl, LlamaRowImpliesBaseline35) {
  const Ratio r = nsl({{49}, {35}});
  EXPECT_DOUBLE_EQ(r.value(), 1.4);
  EXPECT_EQ(r.format(2), "1.40");
}

TEST(Nsl, SumOfSumsNotMeanOfRatios) {
  EXPECT_EQ(nsl({{2, 2}, {1, 3}}), (Ratio{1, 1}));
}

TEST(Nsl, Errors) {
  expect_kind(ErrorKind::kLengthMismatch, [] { nsl({{1, 2}, {1}}); });
  expect_kind(ErrorKind::kEmptySet, [] { nsl({{}, {}}); });
  expect_kind(ErrorKind::kZeroBaseline, [] { nsl({{1}, {0}}); });
}

TEST(Nsl, ReciprocityAndScaleInvariance) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 20;
    NslInput in;
    for (std::size_t k = 0; k < n; ++k) {
      in.lengths_lambda.push_back(1 + rng() % 500);
      in.lengths_beta.push_back(1 + rng() % 500);
    }
    const Ratio ab = nsl(in);
    const Ratio ba = nsl({in.lengths_beta, in.lengths_lambda});
    EXPECT_EQ(static_cast<unsigned __int128>(ab.numerator) * ba.numerator,
              static_cast<unsigned __int128>(ab.denominator) * ba.denominator);
    EXPECT_NEAR(ab.value() * ba.value(), 1.0, 1e-12);

    const std::uint64_t k = 1 + rng() % 1000;
    NslInput scaled = in;
    for (auto& v : scaled.lengths_lambda) v *= k;
    for (auto& v : scaled.lengths_beta) v *= k;
    EXPECT_EQ(nsl(scaled), ab);
  }
}

TEST(RatioFormat, HalfToEvenOnExactValue) {
  EXPECT_EQ((Ratio{1, 8}).format(2), "0.12");
  EXPECT_EQ((Ratio{3, 8}).format(2), "0.38");
  EXPECT_EQ((Ratio{5, 8}).format(2), "0.62");
  EXPECT_EQ((Ratio{16, 35}).format(2), "0.46");
  EXPECT_EQ((Ratio{52, 35}).format(2), "1.49");
  EXPECT_EQ((Ratio{2, 3}).format(0), "1");
  EXPECT_EQ((Ratio{1, 2}).format(0), "0");
  EXPECT_EQ((Ratio{0, 7}).format(3), "0.000");
}

TEST(RatioFormat, AgreesWithPrintfAwayFromTies) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5000; ++i) {
    const Ratio r{rng() % 100000, 1 + rng() % 100000};
    if (2 * ((r.numerator * 100) % r.denominator) == r.denominator) continue;
    const double scaled = r.value() * 100;
    if (std::abs(scaled - std::floor(scaled) - 0.5) < 1e-6) continue;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", r.value());
    EXPECT_EQ(r.format(2), buf) << r.numerator << "/" << r.denominator;
  }
}

TEST(Classification, HandArithmetic) {
  const ConfusionCounts c{2, 2, 1, 1};
  EXPECT_DOUBLE_EQ(*precision(c), 2.0 / 3);
  EXPECT_DOUBLE_EQ(*recall(c), 2.0 / 3);
  EXPECT_DOUBLE_EQ(*f1(c), 2.0 / 3);
  EXPECT_DOUBLE_EQ(*accuracy(c), 2.0 / 3);
}

TEST(Classification, PerfectClassifier) {
  const ConfusionCounts c{7, 0, 0, 0};
  EXPECT_EQ(precision(c), 1.0);
  EXPECT_EQ(recall(c), 1.0);
  EXPECT_EQ(f1(c), 1.0);
  EXPECT_EQ(accuracy(c), 1.0);
}

TEST(Classification, UndefinedIsNotZero) {
  const ConfusionCounts none{0, 5, 0, 3};
  EXPECT_FALSE(precision(none).has_value());
  EXPECT_EQ(recall(none), 0.0);
  EXPECT_FALSE(recall({0, 1, 1, 0}).has_value());
  EXPECT_FALSE(f1({0, 4, 0, 0}).has_value());
  EXPECT_FALSE(accuracy({}).has_value());
}

TEST(Classification, CountFormMatchesHarmonicMeanAndStaysInRange) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{rng() % 50, rng() % 50, rng() % 50, rng() % 50};
    for (const MetricValue v : {precision(c), recall(c), f1(c), accuracy(c)}) {
      if (v) {
        EXPECT_GE(*v, 0.0);
        EXPECT_LE(*v, 1.0);
      }
    }
    const auto p = precision(c), r = recall(c);
    if (p && r && *p + *r > 0) EXPECT_NEAR(*f1(c), 2 * *p * *r / (*p + *r), 1e-12);
  }
}

TEST(ExactMatch, Examples) {
  const std::vector<std::string> ref{"a", "b", "c", "d"};
  EXPECT_EQ(exact_match(ref, ref), 1.0);
  EXPECT_EQ(exact_match(std::vector<std::string>{"a", "b", "c", "x"}, ref), 0.75);
  EXPECT_EQ(exact_match(std::vector<std::string>{"w", "x", "y", "z"}, ref), 0.0);
  // Composed and decomposed forms compare equal.
  EXPECT_EQ(exact_match(std::vector<std::string>{"e\u0301"}, std::vector<std::string>{"\u00E9"}), 1.0);
  expect_kind(ErrorKind::kLengthMismatch, [&] { exact_match(std::vector<std::string>{"a"}, ref); });
  expect_kind(ErrorKind::kEmptySet, [] { exact_match({}, {}); });
}

TEST(Histogram, BucketsPartitionZeroToMax) {
  const std::vector<std::uint64_t> small{0, 3, 3, 20};
  const Histogram h = length_histogram(small);
  EXPECT_EQ(h.bucket_width, 1u);
  ASSERT_EQ(h.counts.size(), 21u);
  EXPECT_EQ(h.counts[3], 2u);
  EXPECT_EQ(h.counts[20], 1u);

  const std::vector<std::uint64_t> wide{41, 100};
  const Histogram w = length_histogram(wide);
  EXPECT_EQ(w.bucket_width, 5u);
  ASSERT_EQ(w.counts.size(), 21u);
  EXPECT_EQ(w.counts[8], 1u);
  EXPECT_EQ(w.counts[20], 1u);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint64_t> v(1 + rng() % 30);
    for (auto& x : v) x = rng() % 1000;
    const Histogram r = length_histogram(v);
    std::uint64_t total = 0;
    for (auto c : r.counts) total += c;
    EXPECT_EQ(total, v.size());
    EXPECT_LE(r.counts.size(), 21u);
    EXPECT_GT(r.counts.size() * r.bucket_width, *std::max_element(v.begin(), v.end()));
  }
}

TEST(TokenStats, Examples) {
  const TokenizerModel chars(simple_definition({"a", "b"}));
  EXPECT_EQ(token_stats(chars, Corpus::from_texts({"ab"})).total_tokens, 2u);

  ModelDefinition def = simple_definition({"a"});
  def.special_tokens.push_back({"<bos>", 1, true});
  EXPECT_EQ(token_stats(TokenizerModel(def), Corpus::from_texts({""})).total_tokens, 1u);

  const TokenizerModel stub = testing::stub_tokenizer("sutra_like");
  const TokenStats s = token_stats(stub, Corpus::from_texts({fixture_sentence(), fixture_sentence()}));
  EXPECT_EQ(s.total_tokens, 32u);
  EXPECT_EQ(s.mean, 16.0);
  EXPECT_EQ(s.median, 16.0);
  EXPECT_EQ(s.per_example_counts, (std::vector<std::uint64_t>{16, 16}));
}

TEST(TokenStats, MedianOfEvenCountAveragesMiddle) {
  const TokenStats s = summarize_lengths({5, 1, 4, 2});
  EXPECT_EQ(s.total_tokens, 12u);
  EXPECT_EQ(s.mean, 3.0);
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(summarize_lengths({9, 1, 4}).median, 4.0);
}

TEST(Coverage, Examples) {
  ModelDefinition full = simple_definition({"a", "b", " "});
  testing::add_hex_tokens(full);
  EXPECT_EQ(vocab_coverage(TokenizerModel(full), Corpus::from_texts({"ab ba"})), 1.0);

  ModelDefinition ascii = simple_definition({"a", "b", "c", " "});
  testing::add_hex_tokens(ascii);
  EXPECT_EQ(vocab_coverage(TokenizerModel(ascii), Corpus::from_texts({"জীৱনৰ", "মোহিত"})), 0.0);

  ModelDefinition only_a = simple_definition({"a"});
  testing::add_hex_tokens(only_a);
  const TokenizerModel m(only_a);
  EXPECT_EQ(vocab_coverage(m, Corpus::from_texts({"ab"})), 0.5);
  const CoverageCounts c = coverage_of(encode_detailed(m, "ab"));
  EXPECT_EQ(c.covered, 1u);
  EXPECT_EQ(c.total, 2u);
}

TEST(Coverage, UnkDoesNotCount) {
  ModelDefinition def = simple_definition({"a"}, {}, ByteFallbackMode::kNone);
  def.special_tokens.push_back({"<unk>", 1, false});
  def.unk_token = "<unk>";
  EXPECT_EQ(vocab_coverage(TokenizerModel(def), Corpus::from_texts({"aaxx"})), 0.5);
}

TEST(Throughput, AccountingIdentities) {
  const TokenizerModel m = testing::stub_tokenizer("gemma_like");
  const Corpus corpus = Corpus::from_texts({fixture_sentence(), "hello", ""});
  std::uint64_t bytes = 0;
  for (const Record& r : corpus.records) bytes += r.text.size();
  const ThroughputSample s = throughput(m, corpus, 3);
  EXPECT_EQ(s.bytes_processed, 3 * bytes);
  EXPECT_EQ(s.tokens_emitted, 3 * token_stats(m, corpus).total_tokens);
  EXPECT_GT(s.wall_time, 0.0);
  EXPECT_TRUE(std::isfinite(s.bytes_per_second()));
  EXPECT_GT(s.tokens_per_second(), 0.0);
}

}  // namespace
}  // namespace toklab
