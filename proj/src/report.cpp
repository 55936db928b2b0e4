#include <charconv>
#include <sstream>

#include "json.hpp"
#include "toklab/error.hpp"
#include "toklab/harness.hpp"

namespace toklab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Shortest representation that parses back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

std::string fixed(double v, int decimals) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(decimals);
  os << v;
  return os.str();
}

std::string to_markdown(const ComparisonReport& report) {
  std::ostringstream os;
  os << "| Name | Vocab Size | Avg NSL | Number of Tokens | Coverage | Tokens/s |\n";
  os << "|---|---:|---:|---:|---:|---:|\n";
  for (const ReportRow& row : report.rows) {
    os << "| " << md_cell(row.name) << (row.is_baseline ? " (baseline)" : "") << " | "
       << (row.vocab_size ? std::to_string(*row.vocab_size) : "-") << " | "
       << row.avg_nsl.format(2) << " | " << row.total_tokens << " | "
       << fixed(row.coverage.fraction(), 4) << " | "
       << (row.tokens_per_second ? fixed(*row.tokens_per_second, 0) : "-") << " |\n";
  }
  os << "\nBaseline: " << report.baseline << " (" << report.baseline_total << " tokens over "
     << report.metadata.records << (report.metadata.records == 1 ? " record" : " records")
     << "). Lower Avg NSL is better.\n";
  return os.str();
}

std::string to_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "name,vocab_size,avg_nsl,total_tokens,mean_tokens,median_tokens,coverage,"
        "bytes_per_second,tokens_per_second,is_baseline\r\n";
  for (const ReportRow& row : report.rows) {
    os << csv_field(row.name) << ',' << (row.vocab_size ? std::to_string(*row.vocab_size) : "")
       << ',' << shortest(row.avg_nsl.value()) << ',' << row.total_tokens << ','
       << shortest(row.mean_tokens) << ',' << shortest(row.median_tokens) << ','
       << shortest(row.coverage.fraction()) << ','
       << (row.bytes_per_second ? shortest(*row.bytes_per_second) : "") << ','
       << (row.tokens_per_second ? shortest(*row.tokens_per_second) : "") << ','
       << (row.is_baseline ? "true" : "false") << "\r\n";
  }
  return os.str();
}

ordered_json items_json(const TokenBreakdown& breakdown) {
  ordered_json items = ordered_json::array();
  for (const BreakdownItem& item : breakdown.items) {
    items.push_back({{"display", item.display},
                     {"id", item.id},
                     {"byte_span", {item.span.begin, item.span.end}},
                     {"kind", std::string(to_string(item.kind))}});
  }
  return items;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  return std::nullopt;
}

std::string report_to_json(const ComparisonReport& report) {
  ordered_json doc;
  doc["baseline"] = report.baseline;
  doc["baseline_total"] = report.baseline_total;
  ordered_json rows = ordered_json::array();
  for (const ReportRow& row : report.rows) {
    ordered_json r;
    r["name"] = row.name;
    r["vocab_size"] = row.vocab_size ? ordered_json(*row.vocab_size) : ordered_json(nullptr);
    r["avg_nsl"] = row.avg_nsl.value();
    r["avg_nsl_display"] = row.avg_nsl.format(2);
    r["nsl_numerator"] = row.avg_nsl.numerator;
    r["nsl_denominator"] = row.avg_nsl.denominator;
    r["total_tokens"] = row.total_tokens;
    r["mean_tokens"] = row.mean_tokens;
    r["median_tokens"] = row.median_tokens;
    r["coverage"] = row.coverage.fraction();
    r["covered_codepoints"] = row.coverage.covered;
    r["total_codepoints"] = row.coverage.total;
    r["bytes_per_second"] = optional_number(row.bytes_per_second);
    r["tokens_per_second"] = optional_number(row.tokens_per_second);
    r["length_histogram"] = {{"bucket_width", row.length_histogram.bucket_width},
                             {"counts", row.length_histogram.counts}};
    r["is_baseline"] = row.is_baseline;
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  ordered_json breakdowns = ordered_json::array();
  for (const RecordBreakdown& rb : report.breakdowns) {
    ordered_json b;
    b["record_id"] = rb.record_id;
    b["tokenizer"] = rb.tokenizer;
    b["source_text"] = rb.breakdown.source_text;
    b["items"] = items_json(rb.breakdown);
    breakdowns.push_back(std::move(b));
  }
  doc["breakdowns"] = std::move(breakdowns);
  const auto& md = report.metadata;
  doc["metadata"] = {{"timestamp", md.timestamp},         {"corpus_source", md.corpus_source},
                     {"corpus_hash", md.corpus_hash},     {"records", md.records},
                     {"corpus_bytes", md.corpus_bytes},   {"tool_version", md.tool_version}};
  return doc.dump(2) + "\n";
}

ComparisonReport report_from_json(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParseError, std::string("malformed report JSON: ") + e.what());
  }
  try {
    ComparisonReport report;
    report.baseline = doc.at("baseline").get<std::string>();
    report.baseline_total = doc.at("baseline_total").get<std::uint64_t>();
    for (const json& r : doc.at("rows")) {
      ReportRow row;
      row.name = r.at("name").get<std::string>();
      if (!r.at("vocab_size").is_null()) row.vocab_size = r.at("vocab_size").get<std::uint64_t>();
      row.avg_nsl = Ratio{r.at("nsl_numerator").get<std::uint64_t>(), r.at("nsl_denominator").get<std::uint64_t>()};
      row.total_tokens = r.at("total_tokens").get<std::uint64_t>();
      row.mean_tokens = r.at("mean_tokens").get<double>();
      row.median_tokens = r.at("median_tokens").get<double>();
      row.coverage = {r.at("covered_codepoints").get<std::uint64_t>(), r.at("total_codepoints").get<std::uint64_t>()};
      if (!r.at("bytes_per_second").is_null()) row.bytes_per_second = r.at("bytes_per_second").get<double>();
      if (!r.at("tokens_per_second").is_null()) row.tokens_per_second = r.at("tokens_per_second").get<double>();
      row.length_histogram.bucket_width = r.at("length_histogram").at("bucket_width").get<std::uint64_t>();
      row.length_histogram.counts = r.at("length_histogram").at("counts").get<std::vector<std::uint64_t>>();
      row.is_baseline = r.at("is_baseline").get<bool>();
      report.rows.push_back(std::move(row));
    }
    for (const json& b : doc.at("breakdowns")) {
      RecordBreakdown rb;
      rb.record_id = b.at("record_id").get<std::string>();
      rb.tokenizer = b.at("tokenizer").get<std::string>();
      rb.breakdown.source_text = b.at("source_text").get<std::string>();
      for (const json& item : b.at("items")) {
        BreakdownItem bi;
        bi.display = item.at("display").get<std::string>();
        bi.id = item.at("id").get<TokenId>();
        bi.span = {item.at("byte_span").at(0).get<std::size_t>(), item.at("byte_span").at(1).get<std::size_t>()};
        const std::string kind = item.at("kind").get<std::string>();
        bi.kind = kind == "special" ? PieceKind::kSpecial
                  : kind == "byte"  ? PieceKind::kByte
                  : kind == "unk"   ? PieceKind::kUnknown
                                    : PieceKind::kToken;
        rb.breakdown.items.push_back(std::move(bi));
      }
      report.breakdowns.push_back(std::move(rb));
    }
    const json& md = doc.at("metadata");
    report.metadata.timestamp = md.at("timestamp").get<std::string>();
    report.metadata.corpus_source = md.at("corpus_source").get<std::string>();
    report.metadata.corpus_hash = md.at("corpus_hash").get<std::string>();
    report.metadata.records = md.at("records").get<std::uint64_t>();
    report.metadata.corpus_bytes = md.at("corpus_bytes").get<std::uint64_t>();
    report.metadata.tool_version = md.at("tool_version").get<std::string>();
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("report JSON: ") + e.what());
  }
}

std::string breakdown_to_json(const TokenBreakdown& breakdown) {
  ordered_json doc;
  doc["source_text"] = breakdown.source_text;
  doc["items"] = items_json(breakdown);
  return doc.dump(2) + "\n";
}

std::string emit_report(const ComparisonReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kMarkdown: return to_markdown(report);
    case ReportFormat::kCsv: return to_csv(report);
    case ReportFormat::kJson: return report_to_json(report);
  }
  return {};
}

}  // namespace toklab
