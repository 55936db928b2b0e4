#include "toklab/tokfile.hpp"

#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "toklab/error.hpp"

namespace toklab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kSchemaError, path + ": " + what);
}

const json& require(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string child(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

std::string require_string(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_string()) schema(child(path, key), "expected string, got " + std::string(v.type_name()));
  return v.get<std::string>();
}

TokenId to_token_id(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema(path, "expected integer id, got " + std::string(v.type_name()));
  const auto value = v.get<std::int64_t>();
  if (value < 0 || value > std::numeric_limits<TokenId>::max()) {
    schema(path, "id " + std::to_string(value) + " out of range");
  }
  return static_cast<TokenId>(value);
}

}  // namespace

std::string escape_merge_symbol(std::string_view symbol) {
  std::string out;
  out.reserve(symbol.size());
  for (const char c : symbol) {
    if (c == '\\') out += "\\\\";
    else if (c == ' ') out += "\\s";
    else out += c;
  }
  return out;
}

std::optional<std::string> unescape_merge_symbol(std::string_view symbol) {
  std::string out;
  out.reserve(symbol.size());
  for (std::size_t i = 0; i < symbol.size(); ++i) {
    if (symbol[i] != '\\') {
      out += symbol[i];
      continue;
    }
    if (i + 1 >= symbol.size()) return std::nullopt;
    const char next = symbol[++i];
    if (next == '\\') out += '\\';
    else if (next == 's') out += ' ';
    else return std::nullopt;
  }
  return out;
}

std::string save_to_string(const TokenizerModel& model) {
  const ModelDefinition& def = model.definition();
  ordered_json vocab = ordered_json::object();
  for (const auto& [token, id] : model.vocab().entries()) vocab[token] = id;
  ordered_json merges = ordered_json::array();
  for (const Merge& m : def.merges) {
    merges.push_back(escape_merge_symbol(m.left) + " " + escape_merge_symbol(m.right));
  }
  ordered_json specials = ordered_json::array();
  for (const SpecialToken& st : def.special_tokens) {
    ordered_json entry;
    entry["token"] = st.token;
    entry["id"] = st.id;
    entry["prepend"] = st.prepend;
    specials.push_back(std::move(entry));
  }

  ordered_json doc;
  doc["version"] = kTokenizerFileVersion;
  ordered_json m;
  m["type"] = std::string(to_string(def.algorithm));
  m["vocab"] = std::move(vocab);
  m["merges"] = std::move(merges);
  m["byte_fallback"] = std::string(to_string(def.fallback));
  m["unk_token"] = def.unk_token ? ordered_json(*def.unk_token) : ordered_json(nullptr);
  doc["model"] = std::move(m);
  doc["normalizer"] = std::string(to_string(def.normalizer));
  doc["pretokenizer"] = std::string(to_string(def.pretokenizer));
  doc["special_tokens"] = std::move(specials);
  return doc.dump() + "\n";
}

void save(const TokenizerModel& model, std::ostream& out) {
  out << save_to_string(model);
  if (!out) throw Error(ErrorKind::kIoFailure, "failed to write tokenizer '" + model.name() + "'");
}

void save(const TokenizerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot open " + path.string() + " for writing");
  save(model, out);
  out.close();
  if (!out) throw Error(ErrorKind::kIoFailure, "failed to write " + path.string());
}

TokenizerModel load_from_string(std::string_view document, std::string name) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParseError, "malformed tokenizer JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) schema("$", "expected a JSON object");

  const json& version = require(doc, "", "version");
  if (!version.is_number_integer()) schema("version", "expected integer");
  if (version.get<std::int64_t>() != kTokenizerFileVersion) {
    throw Error(ErrorKind::kValidationError,
                "version: unsupported version " + version.dump() + " (expected " +
                    std::to_string(kTokenizerFileVersion) + ")");
  }

  ModelDefinition def;
  def.name = std::move(name);
  const json& model = require(doc, "", "model");
  if (!model.is_object()) schema("model", "expected object");

  const std::string type = require_string(model, "model", "type");
  const auto algorithm = parse_algorithm(type);
  if (!algorithm) schema("model.type", "unknown type '" + type + "'");
  def.algorithm = *algorithm;

  const json& vocab = require(model, "model", "vocab");
  if (!vocab.is_object()) schema("model.vocab", "expected object");
  def.vocab.reserve(vocab.size());
  for (const auto& [token, id] : vocab.items()) {
    def.vocab.emplace_back(token, to_token_id(id, "model.vocab[\"" + token + "\"]"));
  }

  // merges and unk_token are optional for hand-written files.
  if (const auto merges = model.find("merges"); merges != model.end() && !merges->is_null()) {
    if (!merges->is_array()) schema("model.merges", "expected array");
    for (std::size_t i = 0; i < merges->size(); ++i) {
      const std::string path = "model.merges[" + std::to_string(i) + "]";
      const json& entry = (*merges)[i];
      if (!entry.is_string()) schema(path, "expected string");
      const std::string text = entry.get<std::string>();
      const std::size_t space = text.find(' ');
      if (space == std::string::npos || text.find(' ', space + 1) != std::string::npos) {
        schema(path, "expected \"left right\", got '" + text + "'");
      }
      auto left = unescape_merge_symbol(std::string_view(text).substr(0, space));
      auto right = unescape_merge_symbol(std::string_view(text).substr(space + 1));
      if (!left || !right || left->empty() || right->empty()) {
        schema(path, "invalid merge symbol in '" + text + "'");
      }
      def.merges.push_back({std::move(*left), std::move(*right)});
    }
  }

  const std::string fallback = require_string(model, "model", "byte_fallback");
  const auto mode = parse_fallback(fallback);
  if (!mode) schema("model.byte_fallback", "unknown mode '" + fallback + "'");
  def.fallback = *mode;

  if (const auto unk = model.find("unk_token"); unk != model.end() && !unk->is_null()) {
    if (!unk->is_string()) schema("model.unk_token", "expected string or null");
    def.unk_token = unk->get<std::string>();
  }

  const std::string normalizer = require_string(doc, "", "normalizer");
  const auto norm = parse_normalizer(normalizer);
  if (!norm) schema("normalizer", "unknown normalizer '" + normalizer + "'");
  def.normalizer = *norm;

  const std::string pretokenizer = require_string(doc, "", "pretokenizer");
  const auto pre = parse_pretokenizer(pretokenizer);
  if (!pre) schema("pretokenizer", "unknown pretokenizer '" + pretokenizer + "'");
  def.pretokenizer = *pre;

  if (const auto specials = doc.find("special_tokens"); specials != doc.end() && !specials->is_null()) {
    if (!specials->is_array()) schema("special_tokens", "expected array");
    for (std::size_t i = 0; i < specials->size(); ++i) {
      const std::string path = "special_tokens[" + std::to_string(i) + "]";
      const json& entry = (*specials)[i];
      if (!entry.is_object()) schema(path, "expected object");
      SpecialToken st;
      st.token = require_string(entry, path, "token");
      st.id = to_token_id(require(entry, path, "id"), path + ".id");
      if (const auto prepend = entry.find("prepend"); prepend != entry.end()) {
        if (!prepend->is_boolean()) schema(path + ".prepend", "expected boolean");
        st.prepend = prepend->get<bool>();
      }
      def.special_tokens.push_back(std::move(st));
    }
  }

  return TokenizerModel(std::move(def));
}

TokenizerModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open tokenizer file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIoFailure, "failed to read " + path.string());
  try {
    return load_from_string(buf.str(), path.stem().string());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace toklab
