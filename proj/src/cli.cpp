#include "toklab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "toklab/error.hpp"
#include "toklab/harness.hpp"
#include "toklab/service.hpp"
#include "toklab/tokfile.hpp"
#include "toklab/trainers.hpp"

namespace toklab {

namespace {

// Flag errors found after CLI11 parsing; reported like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename T, typename Parse>
T parse_enum(const std::string& flag, const std::string& value, Parse parse) {
  if (const auto v = parse(value)) return *v;
  throw UsageError(flag + ": invalid value '" + value + "'");
}

CorpusFormat corpus_format(const std::string& name, const std::string& path) {
  if (name == "text") return CorpusFormat::kPlainText;
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "auto") {
    return path.ends_with(".jsonl") ? CorpusFormat::kJsonl : CorpusFormat::kPlainText;
  }
  throw UsageError("--format: invalid value '" + name + "'");
}

void write_output(const std::string& path, const std::string& doc, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << doc;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  file << doc;
  if (!file) throw Error(ErrorKind::kIoFailure, "cannot write " + path);
}

struct TrainArgs {
  std::string algo = "bpe";
  std::size_t vocab_size = 0;
  std::string input;
  std::string format = "auto";
  std::string output;
  std::uint64_t min_pair_count = 2;
  std::string fallback = "hex";
  std::string pretokenizer = "whitespace";
  std::string normalizer = "nfc";
  std::string bos;
  std::vector<std::string> specials;
  std::string unk;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig config;
  config.algorithm = parse_enum<Algorithm>("--algo", a.algo, parse_algorithm);
  config.fallback = parse_enum<ByteFallbackMode>("--fallback", a.fallback, parse_fallback);
  config.pretokenizer = parse_enum<PretokenizerKind>("--pretokenizer", a.pretokenizer, parse_pretokenizer);
  config.normalizer = parse_enum<NormalizerKind>("--normalizer", a.normalizer, parse_normalizer);
  const CorpusFormat format = corpus_format(a.format, a.input);
  config.target_vocab_size = a.vocab_size;
  config.min_pair_count = a.min_pair_count;
  if (!a.bos.empty()) config.special_tokens.push_back({a.bos, true});
  for (const std::string& s : a.specials) config.special_tokens.push_back({s, false});
  if (!a.unk.empty()) config.unk_token = a.unk;
  config.name = std::filesystem::path(a.output).stem().string();

  const Corpus corpus = ingest(a.input, format);
  const TokenizerModel model = train(corpus, config);
  save(model, std::filesystem::path(a.output));
  out << "vocab_size " << model.vocab_size() << "\n"
      << "merges " << model.merges().size() << "\n";
  return kExitOk;
}

struct EncodeArgs {
  std::string tokenizer;
  std::string text;
  bool has_text = false;
  bool from_stdin = false;
  bool ids = false;
  bool breakdown = false;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out, std::istream& in) {
  if (a.has_text == a.from_stdin) throw UsageError("exactly one of --text or --stdin is required");
  std::string text = a.text;
  if (a.from_stdin) {
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    // Drop the single newline that `echo` and editors append.
    if (text.ends_with("\r\n")) text.resize(text.size() - 2);
    else if (text.ends_with('\n')) text.pop_back();
  }
  const TokenizerModel model = load(a.tokenizer);
  const TokenBreakdown breakdown = token_breakdown(model, text);
  if (a.breakdown) {
    out << breakdown_to_json(breakdown);
  } else if (a.ids) {
    for (std::size_t i = 0; i < breakdown.items.size(); ++i) {
      out << (i ? " " : "") << breakdown.items[i].id;
    }
    out << "\n";
  } else {
    for (const BreakdownItem& item : breakdown.items) out << item.display << '\t' << item.id << '\n';
  }
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> tokenizers;
  std::string corpus;
  bool fixture = false;
  std::string corpus_format = "auto";
  std::string baseline = std::string(kCodepointBaseline);
  std::string format = "md";
  std::string output;
  unsigned workers = 0;
  bool breakdowns = false;
  bool fixed_clock = false;
};

unsigned resolve_workers(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("TOKLAB_WORKERS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0) throw UsageError("TOKLAB_WORKERS: invalid value '" + std::string(env) + "'");
    return static_cast<unsigned>(v);
  }
  return default_workers();
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  if (a.corpus.empty() == !a.fixture) throw UsageError("exactly one of --corpus or --fixture is required");
  const auto format = parse_report_format(a.format);
  if (!format) throw UsageError("--format: invalid value '" + a.format + "'");
  const CorpusFormat in_format = corpus_format(a.corpus_format, a.corpus);
  ComparisonOptions opts;
  opts.workers = resolve_workers(a.workers);
  opts.include_breakdowns = a.breakdowns;
  opts.fixed_clock = a.fixed_clock;

  std::vector<std::string> names;
  for (const std::string& path : a.tokenizers) {
    const std::string stem = std::filesystem::path(path).stem().string();
    if (stem == kCodepointBaseline) throw UsageError("--tokenizer: name '" + stem + "' is reserved");
    if (std::find(names.begin(), names.end(), stem) != names.end()) {
      throw UsageError("--tokenizer: duplicate tokenizer name '" + stem + "'");
    }
    names.push_back(stem);
  }
  if (a.baseline != kCodepointBaseline &&
      std::find(names.begin(), names.end(), a.baseline) == names.end()) {
    throw UsageError("--baseline: '" + a.baseline + "' is neither a given tokenizer nor 'codepoints'");
  }

  std::vector<TokenizerModel> models;
  models.reserve(a.tokenizers.size());
  for (const std::string& path : a.tokenizers) models.push_back(load(path));
  std::vector<const TokenizerModel*> ptrs;
  Baseline baseline = Baseline::codepoints();
  for (const TokenizerModel& m : models) {
    ptrs.push_back(&m);
    if (m.name() == a.baseline) baseline = Baseline::of(m);
  }

  ComparisonReport report;
  if (a.fixture) {
    report = run_comparison(ptrs, baseline, fixture_corpus(), opts);
  } else {
    std::ifstream file(a.corpus, std::ios::binary);
    if (!file) throw Error(ErrorKind::kIoFailure, "cannot open corpus " + a.corpus);
    RecordReader reader(file, in_format, a.corpus);
    report = run_comparison(ptrs, baseline, reader, opts);
  }
  write_output(a.output, emit_report(report, *format), out);
  return kExitOk;
}

struct ServeArgs {
  std::string tokenizer_dir;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
  bool dev = false;
  std::string cors_origin = "*";
  std::size_t max_text_bytes = 64 * 1024;
  unsigned workers = 0;
};

std::atomic<bool> g_shutdown{false};

extern "C" void on_signal(int) { g_shutdown.store(true); }

int cmd_serve(const ServeArgs& a, std::ostream& err) {
  const TokenizerRegistry registry = TokenizerRegistry::load_directory(a.tokenizer_dir);
  ServiceOptions opts;
  opts.max_text_bytes = a.max_text_bytes;
  opts.dev_cors = a.dev;
  opts.cors_origin = a.cors_origin;
  opts.workers = resolve_workers(a.workers);
  if (!a.static_dir.empty()) opts.static_dir = a.static_dir;
  Server server(registry, opts);
  const int port = server.bind(a.host, a.port);

  g_shutdown.store(false);
  const auto old_int = std::signal(SIGINT, on_signal);
  const auto old_term = std::signal(SIGTERM, on_signal);
  std::jthread watcher([&server](std::stop_token st) {
    while (!st.stop_requested() && !g_shutdown.load()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    // stop() is a no-op until listen() is running, so keep asking.
    while (!st.stop_requested()) {
      server.stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  err << "serving " << registry.models().size() << " tokenizers on http://" << a.host << ":" << port
      << std::endl;
  server.listen();
  watcher.request_stop();
  watcher.join();
  std::signal(SIGINT, old_int);
  std::signal(SIGTERM, old_term);
  err << "shut down" << std::endl;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::istream& in) {
  CLI::App app{"Tokenizer lab: train, encode and compare subword tokenizers", "toklab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a tokenizer from a corpus");
  train_cmd->add_option("--algo", train_args.algo, "bpe or wordpiece_freq")->capture_default_str();
  train_cmd->add_option("--vocab-size", train_args.vocab_size, "Target vocab size, specials included")->required();
  train_cmd->add_option("--input", train_args.input, "Training corpus")->required();
  train_cmd->add_option("--format", train_args.format, "text, jsonl or auto")->capture_default_str();
  train_cmd->add_option("--output", train_args.output, "Tokenizer file to write")->required();
  train_cmd->add_option("--min-pair-count", train_args.min_pair_count)->capture_default_str();
  train_cmd->add_option("--fallback", train_args.fallback, "none, mapped or hex")->capture_default_str();
  train_cmd->add_option("--pretokenizer", train_args.pretokenizer, "none, whitespace or byte_level")
      ->capture_default_str();
  train_cmd->add_option("--normalizer", train_args.normalizer, "none or nfc")->capture_default_str();
  train_cmd->add_option("--bos", train_args.bos, "Special token prepended to every encoding");
  train_cmd->add_option("--special", train_args.specials, "Additional special token (repeatable)");
  train_cmd->add_option("--unk", train_args.unk, "Unknown token (default <unk> with --fallback none)");

  EncodeArgs encode_args;
  CLI::App* encode_cmd = app.add_subcommand("encode", "Encode text with a tokenizer file");
  encode_cmd->add_option("--tokenizer", encode_args.tokenizer, "Tokenizer file")->required();
  CLI::Option* text_opt = encode_cmd->add_option("--text", encode_args.text, "Text to encode");
  CLI::Option* stdin_opt = encode_cmd->add_flag("--stdin", encode_args.from_stdin, "Read text from stdin");
  text_opt->excludes(stdin_opt);
  CLI::Option* ids_opt = encode_cmd->add_flag("--ids", encode_args.ids, "Print space-separated ids");
  CLI::Option* bd_opt = encode_cmd->add_flag("--breakdown", encode_args.breakdown, "Print JSON breakdown");
  ids_opt->excludes(bd_opt);

  CompareArgs compare_args;
  CLI::App* compare_cmd = app.add_subcommand("compare", "Compare tokenizers on a corpus");
  compare_cmd->add_option("--tokenizer", compare_args.tokenizers, "Tokenizer file (repeatable)")->required();
  CLI::Option* corpus_opt = compare_cmd->add_option("--corpus", compare_args.corpus, "Corpus file");
  CLI::Option* fixture_opt =
      compare_cmd->add_flag("--fixture", compare_args.fixture, "Use the bundled Assamese sentence");
  corpus_opt->excludes(fixture_opt);
  compare_cmd->add_option("--corpus-format", compare_args.corpus_format, "text, jsonl or auto")
      ->capture_default_str();
  compare_cmd->add_option("--baseline", compare_args.baseline, "Tokenizer name (file stem) or codepoints")
      ->capture_default_str();
  compare_cmd->add_option("--format", compare_args.format, "md, csv or json")->capture_default_str();
  compare_cmd->add_option("--output", compare_args.output, "Write the report here instead of stdout");
  compare_cmd->add_option("--workers", compare_args.workers, "Worker threads (env TOKLAB_WORKERS)");
  compare_cmd->add_flag("--breakdowns", compare_args.breakdowns, "Include per-record token breakdowns");
  compare_cmd->add_flag("--fixed-clock", compare_args.fixed_clock, "Epoch timestamp, no throughput");

  ServeArgs serve_args;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Serve the comparison API");
  serve_cmd->add_option("--tokenizer-dir", serve_args.tokenizer_dir, "Directory of tokenizer files")->required();
  serve_cmd->add_option("--port", serve_args.port, "0 picks a free port")->capture_default_str();
  serve_cmd->add_option("--host", serve_args.host)->capture_default_str();
  serve_cmd->add_option("--static-dir", serve_args.static_dir, "Web UI assets");
  serve_cmd->add_flag("--dev", serve_args.dev, "Enable CORS for a UI dev server");
  serve_cmd->add_option("--cors-origin", serve_args.cors_origin)->capture_default_str();
  serve_cmd->add_option("--max-text-bytes", serve_args.max_text_bytes)->capture_default_str();
  serve_cmd->add_option("--workers", serve_args.workers, "Worker threads (env TOKLAB_WORKERS)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  encode_args.has_text = text_opt->count() > 0;

  try {
    if (*train_cmd) return cmd_train(train_args, out);
    if (*encode_cmd) return cmd_encode(encode_args, out, in);
    if (*compare_cmd) return cmd_compare(compare_args, out);
    if (*serve_cmd) return cmd_serve(serve_args, err);
  } catch (const UsageError& e) {
    err << "toklab: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "toklab: error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "toklab: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace toklab
