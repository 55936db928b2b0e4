#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toklab/corpus.hpp"
#include "toklab/model.hpp"

namespace toklab {

// Exact non-negative ratio numerator/denominator.
struct Ratio {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  // Decimal rendering rounded half-to-even at `decimals` places, computed on
  // the exact rational.
  std::string format(int decimals = 2) const;

  friend bool operator==(const Ratio& a, const Ratio& b) {
    return static_cast<unsigned __int128>(a.numerator) * b.denominator ==
           static_cast<unsigned __int128>(b.numerator) * a.denominator;
  }
  friend bool operator<(const Ratio& a, const Ratio& b) {
    return static_cast<unsigned __int128>(a.numerator) * b.denominator <
           static_cast<unsigned __int128>(b.numerator) * a.denominator;
  }
};

// Normalized sequence length of tokenizer lambda against baseline beta:
// per-example token counts for the same N examples.
struct NslInput {
  std::vector<std::uint64_t> lengths_lambda;
  std::vector<std::uint64_t> lengths_beta;
};

// Sum over sums, not the mean of per-example ratios. Throws
// LengthMismatch, EmptySet or ZeroBaseline.
Ratio nsl(const NslInput& input);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

// nullopt means undefined (zero denominator), never reported as 0.
using MetricValue = std::optional<double>;

MetricValue precision(const ConfusionCounts& c);
MetricValue recall(const ConfusionCounts& c);
// Count form 2TP / (2TP + FP + FN).
MetricValue f1(const ConfusionCounts& c);
MetricValue accuracy(const ConfusionCounts& c);

// Fraction of positions whose NFC forms match. Throws LengthMismatch or
// EmptySet.
double exact_match(std::span<const std::string> predictions,
                   std::span<const std::string> references);

struct Histogram {
  std::uint64_t bucket_width = 1;
  // counts[k] covers lengths [k * width, (k + 1) * width).
  std::vector<std::uint64_t> counts;
};

// Buckets of width max(1, ceil(max / 20)) spanning [0, max].
Histogram length_histogram(std::span<const std::uint64_t> lengths);

struct TokenStats {
  std::uint64_t total_tokens = 0;
  std::vector<std::uint64_t> per_example_counts;
  double mean = 0.0;
  double median = 0.0;
  Histogram histogram;
};

TokenStats summarize_lengths(std::vector<std::uint64_t> counts);
// Counts include prepended special tokens.
TokenStats token_stats(const TokenizerModel& model, const Corpus& corpus);

// Codepoints covered by a single non-fallback token, out of all codepoints
// of the normalized text.
struct CoverageCounts {
  std::uint64_t covered = 0;
  std::uint64_t total = 0;

  double fraction() const {
    return total == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(total);
  }
};

struct Encoding;
CoverageCounts coverage_of(const Encoding& encoding);
double vocab_coverage(const TokenizerModel& model, const Corpus& corpus);

struct ThroughputSample {
  std::uint64_t bytes_processed = 0;
  std::uint64_t tokens_emitted = 0;
  double wall_time = 0.0;  // seconds, > 0

  double bytes_per_second() const { return static_cast<double>(bytes_processed) / wall_time; }
  double tokens_per_second() const { return static_cast<double>(tokens_emitted) / wall_time; }
};

// Times `repetitions` full encode passes after one untimed warm-up pass.
ThroughputSample throughput(const TokenizerModel& model, const Corpus& corpus, int repetitions);

}  // namespace toklab
