#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toklab/corpus.hpp"
#include "toklab/engine.hpp"
#include "toklab/metrics.hpp"

namespace toklab {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kCodepointBaseline = "codepoints";

// Either a loaded tokenizer or the built-in codepoint pseudo-tokenizer
// (one token per codepoint after NFC).
class Baseline {
 public:
  static Baseline codepoints() { return Baseline(nullptr); }
  static Baseline of(const TokenizerModel& model) { return Baseline(&model); }

  const TokenizerModel* model() const { return model_; }
  std::string name() const { return model_ ? model_->name() : std::string(kCodepointBaseline); }
  std::uint64_t length(std::string_view text) const;

 private:
  explicit Baseline(const TokenizerModel* model) : model_(model) {}
  const TokenizerModel* model_;
};

struct ReportRow {
  std::string name;
  std::optional<std::uint64_t> vocab_size;  // null for the codepoint baseline
  Ratio avg_nsl;
  std::uint64_t total_tokens = 0;
  double mean_tokens = 0.0;
  double median_tokens = 0.0;
  CoverageCounts coverage;
  // Null in fixed-clock mode.
  std::optional<double> bytes_per_second;
  std::optional<double> tokens_per_second;
  Histogram length_histogram;
  bool is_baseline = false;
};

struct RecordBreakdown {
  std::string record_id;
  std::string tokenizer;
  TokenBreakdown breakdown;
};

struct ComparisonReport {
  std::string baseline;
  std::uint64_t baseline_total = 0;
  std::vector<ReportRow> rows;  // ascending avg_nsl, then name
  std::vector<RecordBreakdown> breakdowns;

  struct Metadata {
    std::string timestamp;
    std::string corpus_source;
    std::string corpus_hash;
    std::uint64_t records = 0;
    std::uint64_t corpus_bytes = 0;
    std::string tool_version;
  } metadata;
};

struct ComparisonOptions {
  unsigned workers = 1;
  bool include_breakdowns = false;
  // Epoch timestamp and null throughput so output is byte-identical.
  bool fixed_clock = false;
  // Records encoded per parallel batch.
  std::size_t batch_size = 1024;
};

// Encodes every record once per model on a worker pool, reducing metrics in
// record order. Encode failures are rethrown as EncodeFailure naming the
// model and record id. The baseline always appears as a row (NSL 1.00).
ComparisonReport run_comparison(const std::vector<const TokenizerModel*>& models,
                                const Baseline& baseline, RecordSource& records,
                                const ComparisonOptions& options = {});
ComparisonReport run_comparison(const std::vector<const TokenizerModel*>& models,
                                const Baseline& baseline, const Corpus& corpus,
                                const ComparisonOptions& options = {});

enum class ReportFormat { kMarkdown, kCsv, kJson };
std::optional<ReportFormat> parse_report_format(std::string_view name);

std::string emit_report(const ComparisonReport& report, ReportFormat format);
std::string report_to_json(const ComparisonReport& report);
// Parses emit_report(..., kJson) output back. Throws ParseError/SchemaError.
ComparisonReport report_from_json(std::string_view document);

// {"source_text", "items": [{display, id, byte_span, kind}]}
std::string breakdown_to_json(const TokenBreakdown& breakdown);

unsigned default_workers();

}  // namespace toklab
