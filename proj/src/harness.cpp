#include "toklab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <thread>

#include "toklab/error.hpp"

namespace toklab {

std::uint64_t Baseline::length(std::string_view text) const {
  if (model_) return encode(*model_, text).size();
  if (const auto bad = utf8::find_invalid(text)) throw Error::utf8(*bad, "baseline input");
  return utf8::count_codepoints(normalize(text, NormalizerKind::kNfc));
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

namespace {

struct ModelResult {
  std::uint64_t tokens = 0;
  CoverageCounts coverage;
  double seconds = 0.0;
  std::optional<TokenBreakdown> breakdown;
};

struct RecordResult {
  std::vector<ModelResult> models;
  std::uint64_t baseline = 0;
  std::optional<std::string> error;
};

struct ModelAccum {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  CoverageCounts coverage;
  std::uint64_t bytes = 0;
  double seconds = 0.0;
};

void process(const std::vector<const TokenizerModel*>& models, const Baseline& baseline,
             const Record& record, bool breakdowns, RecordResult& out) {
  out.models.resize(models.size());
  std::size_t m = 0;
  try {
    for (; m < models.size(); ++m) {
      const auto start = std::chrono::steady_clock::now();
      Encoding enc = encode_detailed(*models[m], record.text);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      ModelResult& r = out.models[m];
      r.seconds = elapsed.count();
      r.tokens = enc.pieces.size();
      r.coverage = coverage_of(enc);
      if (breakdowns) r.breakdown = breakdown_of(*models[m], std::move(enc));
    }
    m = models.size();
    out.baseline = baseline.length(record.text);
  } catch (const std::exception& e) {
    const std::string who = m < models.size() ? models[m]->name() : baseline.name();
    out.error = "tokenizer '" + who + "' failed on record '" + record.id + "': " + e.what();
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ComparisonReport run_comparison(const std::vector<const TokenizerModel*>& requested,
                                const Baseline& baseline, RecordSource& records,
                                const ComparisonOptions& options) {
  if (requested.empty()) throw Error(ErrorKind::kInvalidArgument, "no tokenizers to compare");
  std::vector<const TokenizerModel*> models = requested;
  if (baseline.model() && std::find(models.begin(), models.end(), baseline.model()) == models.end()) {
    models.push_back(baseline.model());
  }

  std::vector<ModelAccum> accum(models.size());
  std::uint64_t baseline_total = 0;
  std::vector<std::uint64_t> baseline_counts;
  std::uint64_t corpus_bytes = 0;
  std::uint64_t record_count = 0;
  CorpusHasher hasher;
  ComparisonReport report;

  const unsigned workers = std::max(1u, options.workers);
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  std::vector<Record> batch;
  std::vector<RecordResult> results;
  for (;;) {
    batch.clear();
    while (batch.size() < batch_size) {
      auto record = records.next();
      if (!record) break;
      batch.push_back(std::move(*record));
    }
    if (batch.empty()) break;

    results.assign(batch.size(), RecordResult{});
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < batch.size(); i = next.fetch_add(1)) {
        process(models, baseline, batch[i], options.include_breakdowns, results[i]);
      }
    };
    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(workers, batch.size()));
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(threads);
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }

    // Reduce in record order regardless of completion order.
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const RecordResult& r = results[i];
      if (r.error) throw Error(ErrorKind::kEncodeFailure, *r.error);
      hasher.add(batch[i]);
      ++record_count;
      corpus_bytes += batch[i].text.size();
      baseline_total += r.baseline;
      if (!baseline.model()) baseline_counts.push_back(r.baseline);
      for (std::size_t m = 0; m < models.size(); ++m) {
        const ModelResult& mr = r.models[m];
        ModelAccum& a = accum[m];
        a.counts.push_back(mr.tokens);
        a.total += mr.tokens;
        a.coverage.covered += mr.coverage.covered;
        a.coverage.total += mr.coverage.total;
        a.bytes += batch[i].text.size();
        a.seconds += mr.seconds;
      }
      if (options.include_breakdowns) {
        for (std::size_t m = 0; m < models.size(); ++m) {
          report.breakdowns.push_back({batch[i].id, models[m]->name(), *r.models[m].breakdown});
        }
      }
    }
  }

  if (record_count == 0) throw Error(ErrorKind::kEmptyCorpus, "corpus " + records.source() + " has no records");
  if (baseline_total == 0) {
    throw Error(ErrorKind::kZeroBaseline, "baseline '" + baseline.name() + "' produced zero tokens");
  }

  report.baseline = baseline.name();
  report.baseline_total = baseline_total;
  for (std::size_t m = 0; m < models.size(); ++m) {
    ModelAccum& a = accum[m];
    ReportRow row;
    row.name = models[m]->name();
    row.vocab_size = models[m]->vocab_size();
    row.avg_nsl = Ratio{a.total, baseline_total};
    row.coverage = a.coverage;
    row.is_baseline = models[m] == baseline.model();
    if (!options.fixed_clock) {
      const double seconds = std::max(a.seconds, 1e-9);
      row.bytes_per_second = static_cast<double>(a.bytes) / seconds;
      row.tokens_per_second = static_cast<double>(a.total) / seconds;
    }
    TokenStats stats = summarize_lengths(std::move(a.counts));
    row.total_tokens = stats.total_tokens;
    row.mean_tokens = stats.mean;
    row.median_tokens = stats.median;
    row.length_histogram = std::move(stats.histogram);
    report.rows.push_back(std::move(row));
  }
  if (!baseline.model()) {
    ReportRow row;
    row.name = std::string(kCodepointBaseline);
    row.avg_nsl = Ratio{baseline_total, baseline_total};
    TokenStats stats = summarize_lengths(std::move(baseline_counts));
    row.total_tokens = stats.total_tokens;
    row.mean_tokens = stats.mean;
    row.median_tokens = stats.median;
    row.length_histogram = std::move(stats.histogram);
    row.coverage = {baseline_total, baseline_total};
    row.is_baseline = true;
    report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (!(a.avg_nsl == b.avg_nsl)) return a.avg_nsl < b.avg_nsl;
    return a.name < b.name;
  });

  report.metadata.timestamp = options.fixed_clock ? "1970-01-01T00:00:00Z" : utc_timestamp();
  report.metadata.corpus_source = records.source();
  report.metadata.corpus_hash = hasher.hex();
  report.metadata.records = record_count;
  report.metadata.corpus_bytes = corpus_bytes;
  report.metadata.tool_version = std::string(kToolVersion);
  return report;
}

ComparisonReport run_comparison(const std::vector<const TokenizerModel*>& models,
                                const Baseline& baseline, const Corpus& corpus,
                                const ComparisonOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "corpus " + corpus.source + " has no records");
  CorpusSource reader(corpus);
  return run_comparison(models, baseline, reader, options);
}

}  // namespace toklab
