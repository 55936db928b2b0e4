#include "toklab/metrics.hpp"

#include <algorithm>
#include <chrono>

#include "toklab/engine.hpp"
#include "toklab/error.hpp"

namespace toklab {

std::string Ratio::format(int decimals) const {
  using u128 = unsigned __int128;
  u128 scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const u128 scaled = static_cast<u128>(numerator) * scale;
  u128 q = scaled / denominator;
  const u128 r = scaled % denominator;
  const u128 twice = r * 2;
  if (twice > denominator || (twice == denominator && (q & 1) == 1)) ++q;

  const auto whole = static_cast<std::uint64_t>(q / scale);
  auto frac = static_cast<std::uint64_t>(q % scale);
  std::string out = std::to_string(whole);
  if (decimals > 0) {
    std::string digits(static_cast<std::size_t>(decimals), '0');
    for (int i = decimals - 1; i >= 0; --i) {
      digits[static_cast<std::size_t>(i)] = static_cast<char>('0' + frac % 10);
      frac /= 10;
    }
    out += "." + digits;
  }
  return out;
}

Ratio nsl(const NslInput& input) {
  if (input.lengths_lambda.size() != input.lengths_beta.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "NSL needs per-example counts for the same examples (" +
                    std::to_string(input.lengths_lambda.size()) + " vs " +
                    std::to_string(input.lengths_beta.size()) + ")");
  }
  if (input.lengths_lambda.empty()) throw Error(ErrorKind::kEmptySet, "NSL needs at least one example");
  Ratio r;
  r.numerator = 0;
  r.denominator = 0;
  for (std::size_t i = 0; i < input.lengths_lambda.size(); ++i) {
    r.numerator += input.lengths_lambda[i];
    r.denominator += input.lengths_beta[i];
  }
  if (r.denominator == 0) throw Error(ErrorKind::kZeroBaseline, "baseline produced zero tokens");
  return r;
}

namespace {

MetricValue ratio_or_undefined(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricValue precision(const ConfusionCounts& c) { return ratio_or_undefined(c.tp, c.tp + c.fp); }
MetricValue recall(const ConfusionCounts& c) { return ratio_or_undefined(c.tp, c.tp + c.fn); }
MetricValue f1(const ConfusionCounts& c) { return ratio_or_undefined(2 * c.tp, 2 * c.tp + c.fp + c.fn); }
MetricValue accuracy(const ConfusionCounts& c) {
  return ratio_or_undefined(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
}

double exact_match(std::span<const std::string> predictions,
                   std::span<const std::string> references) {
  if (predictions.size() != references.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(references.size()) + " references");
  }
  if (predictions.empty()) throw Error(ErrorKind::kEmptySet, "exact match over an empty set");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (normalize(predictions[i], NormalizerKind::kNfc) ==
        normalize(references[i], NormalizerKind::kNfc)) {
      ++matches;
    }
  }
  return static_cast<double>(matches) / static_cast<double>(predictions.size());
}

Histogram length_histogram(std::span<const std::uint64_t> lengths) {
  Histogram h;
  const std::uint64_t max = lengths.empty() ? 0 : *std::max_element(lengths.begin(), lengths.end());
  h.bucket_width = std::max<std::uint64_t>(1, (max + 19) / 20);
  h.counts.assign(max / h.bucket_width + 1, 0);
  for (const std::uint64_t len : lengths) ++h.counts[len / h.bucket_width];
  return h;
}

TokenStats summarize_lengths(std::vector<std::uint64_t> counts) {
  TokenStats stats;
  for (const std::uint64_t c : counts) stats.total_tokens += c;
  if (!counts.empty()) {
    stats.mean = static_cast<double>(stats.total_tokens) / static_cast<double>(counts.size());
    std::vector<std::uint64_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    stats.median = sorted.size() % 2 == 1
                       ? static_cast<double>(sorted[mid])
                       : (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid])) / 2.0;
  }
  stats.histogram = length_histogram(counts);
  stats.per_example_counts = std::move(counts);
  return stats;
}

TokenStats token_stats(const TokenizerModel& model, const Corpus& corpus) {
  std::vector<std::uint64_t> counts;
  counts.reserve(corpus.size());
  for (const Record& r : corpus.records) counts.push_back(encode(model, r.text).size());
  return summarize_lengths(std::move(counts));
}

CoverageCounts coverage_of(const Encoding& encoding) {
  CoverageCounts out;
  const auto cps = utf8::codepoint_spans(encoding.normalized);
  out.total = cps.size();
  std::size_t p = 0;
  const auto& pieces = encoding.pieces;
  for (const ByteSpan& cp : cps) {
    while (p < pieces.size() && (pieces[p].kind == PieceKind::kSpecial || pieces[p].span.end <= cp.begin)) ++p;
    if (p < pieces.size() && pieces[p].kind == PieceKind::kToken && pieces[p].span.begin <= cp.begin &&
        pieces[p].span.end >= cp.end) {
      ++out.covered;
    }
  }
  return out;
}

double vocab_coverage(const TokenizerModel& model, const Corpus& corpus) {
  CoverageCounts total;
  for (const Record& r : corpus.records) {
    const CoverageCounts c = coverage_of(encode_detailed(model, r.text));
    total.covered += c.covered;
    total.total += c.total;
  }
  return total.fraction();
}

ThroughputSample throughput(const TokenizerModel& model, const Corpus& corpus, int repetitions) {
  if (repetitions < 1) throw Error(ErrorKind::kInvalidArgument, "repetitions must be at least 1");
  const auto pass = [&] {
    std::uint64_t tokens = 0;
    for (const Record& r : corpus.records) tokens += encode(model, r.text).size();
    return tokens;
  };
  pass();
  ThroughputSample sample;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repetitions; ++i) {
    sample.tokens_emitted += pass();
    sample.bytes_processed += corpus.byte_size();
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  sample.wall_time = std::max(elapsed.count(), 1e-9);
  return sample;
}

}  // namespace toklab
