#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace toklab {

struct Record {
  std::string id;
  std::string text;
  friend bool operator==(const Record&, const Record&) = default;
};

struct Corpus {
  std::vector<Record> records;
  std::string source;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
  // Total UTF-8 bytes over all record texts.
  std::size_t byte_size() const;
  // Stable 64-bit FNV-1a digest over ids and texts, hex encoded.
  std::string hash() const;

  // Builds a corpus with auto-assigned ids from plain strings.
  static Corpus from_texts(const std::vector<std::string>& texts, std::string source = "inline");
};

// Incremental form of Corpus::hash for streamed records.
class CorpusHasher {
 public:
  void add(const Record& record);
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

enum class CorpusFormat { kPlainText, kJsonl };

// Pull-based record stream so consumers can process corpora larger than
// memory.
class RecordSource {
 public:
  virtual ~RecordSource() = default;
  virtual std::optional<Record> next() = 0;
  virtual const std::string& source() const = 0;
};

// Iterates an in-memory corpus.
class CorpusSource : public RecordSource {
 public:
  explicit CorpusSource(const Corpus& corpus) : corpus_(corpus) {}
  std::optional<Record> next() override {
    if (pos_ >= corpus_.records.size()) return std::nullopt;
    return corpus_.records[pos_++];
  }
  const std::string& source() const override { return corpus_.source; }

 private:
  const Corpus& corpus_;
  std::size_t pos_ = 0;
};

// Validates UTF-8 (Utf8Error with absolute byte offset), parses JSONL
// lines, auto-assigns ordinal ids and rejects duplicate ids.
class RecordReader : public RecordSource {
 public:
  RecordReader(std::istream& in, CorpusFormat format, std::string source = "stream");

  std::optional<Record> next() override;
  const std::string& source() const override { return source_; }
  std::size_t records_read() const { return ordinal_; }

 private:
  std::istream& in_;
  CorpusFormat format_;
  std::string source_;
  std::size_t offset_ = 0;
  std::size_t line_no_ = 0;
  std::size_t ordinal_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

std::string ordinal_id(std::size_t ordinal);

// Reads a whole corpus. Throws IoFailure, Utf8Error, ParseError,
// SchemaError or EmptyCorpus.
Corpus ingest(std::istream& in, CorpusFormat format, std::string source = "stream");
Corpus ingest(const std::string& path, CorpusFormat format);

// Bundled single-sentence Assamese fixture (35 codepoints after NFC).
const std::string& fixture_sentence();
Corpus fixture_corpus();

}  // namespace toklab
