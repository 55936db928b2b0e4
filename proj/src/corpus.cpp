#include "toklab/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <istream>

#include "json.hpp"
#include "toklab/core.hpp"
#include "toklab/error.hpp"

namespace toklab {

std::size_t Corpus::byte_size() const {
  std::size_t total = 0;
  for (const Record& r : records) total += r.text.size();
  return total;
}

void CorpusHasher::add(const Record& record) {
  const auto mix = [this](std::string_view bytes) {
    for (const char c : bytes) {
      state_ ^= static_cast<unsigned char>(c);
      state_ *= 0x100000001b3ULL;
    }
  };
  // Length prefixes keep ("ab","c") and ("a","bc") distinct.
  mix(std::to_string(record.id.size()) + ":");
  mix(record.id);
  mix(std::to_string(record.text.size()) + ":");
  mix(record.text);
}

std::string CorpusHasher::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string Corpus::hash() const {
  CorpusHasher hasher;
  for (const Record& r : records) hasher.add(r);
  return hasher.hex();
}

Corpus Corpus::from_texts(const std::vector<std::string>& texts, std::string source) {
  Corpus corpus;
  corpus.source = std::move(source);
  corpus.records.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) corpus.records.push_back({ordinal_id(i), texts[i]});
  return corpus;
}

std::string ordinal_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%08zu", ordinal);
  return buf;
}

RecordReader::RecordReader(std::istream& in, CorpusFormat format, std::string source)
    : in_(in), format_(format), source_(std::move(source)) {}

std::optional<Record> RecordReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    const std::size_t line_offset = offset_;
    offset_ += line.size() + 1;
    ++line_no_;
    if (const auto bad = utf8::find_invalid(line)) {
      throw Error::utf8(line_offset + *bad, source_ + " line " + std::to_string(line_no_));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    Record record;
    if (format_ == CorpusFormat::kPlainText) {
      if (line.empty()) continue;
      record.text = std::move(line);
    } else {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      const std::string where = source_ + " line " + std::to_string(line_no_);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::kParseError, where + ": " + e.what());
      }
      if (!doc.is_object()) throw Error(ErrorKind::kSchemaError, where + ": record is not a JSON object");
      const auto text = doc.find("text");
      if (text == doc.end() || !text->is_string()) {
        throw Error(ErrorKind::kSchemaError, where + ": missing string field 'text'");
      }
      record.text = text->get<std::string>();
      if (const auto id = doc.find("id"); id != doc.end()) {
        if (id->is_string()) {
          record.id = id->get<std::string>();
        } else if (id->is_number_integer()) {
          record.id = id->dump();
        } else if (!id->is_null()) {
          throw Error(ErrorKind::kSchemaError, where + ": field 'id' must be a string or integer");
        }
      }
    }
    if (record.id.empty()) record.id = ordinal_id(ordinal_);
    if (!seen_ids_.insert(record.id).second) {
      throw Error(ErrorKind::kSchemaError, source_ + " line " + std::to_string(line_no_) +
                                               ": duplicate record id '" + record.id + "'");
    }
    ++ordinal_;
    return record;
  }
  if (in_.bad()) throw Error(ErrorKind::kIoFailure, "read failure on " + source_);
  return std::nullopt;
}

Corpus ingest(std::istream& in, CorpusFormat format, std::string source) {
  Corpus corpus;
  corpus.source = source;
  RecordReader reader(in, format, std::move(source));
  while (auto record = reader.next()) corpus.records.push_back(std::move(*record));
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "corpus " + corpus.source + " has no records");
  return corpus;
}

Corpus ingest(const std::string& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open corpus " + path);
  return ingest(in, format, path);
}

const std::string& fixture_sentence() {
  static const std::string sentence = "জীৱনৰ পৰিসৰে মোহিত হোৱাটো বাঞ্ছনীয়";
  return sentence;
}

Corpus fixture_corpus() {
  Corpus corpus;
  corpus.source = "fixture:miri-jiyori";
  corpus.records.push_back({"miri-jiyori", fixture_sentence()});
  return corpus;
}

}  // namespace toklab
