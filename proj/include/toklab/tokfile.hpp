#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "toklab/model.hpp"

namespace toklab {

inline constexpr int kTokenizerFileVersion = 1;

// Single-document JSON tokenizer format:
//
//   { "version": 1,
//     "model": { "type", "vocab", "merges", "byte_fallback", "unk_token" },
//     "normalizer", "pretokenizer", "special_tokens": [{token, id, prepend}] }
//
// Vocab is written in id order and merges in rank order. Inside merge
// strings a symbol's spaces are written as "\s" and backslashes as "\\".
std::string save_to_string(const TokenizerModel& model);
void save(const TokenizerModel& model, std::ostream& out);
// Throws IoFailure.
void save(const TokenizerModel& model, const std::filesystem::path& path);

// Throws ParseError, SchemaError (with field path) or ValidationError.
TokenizerModel load_from_string(std::string_view document, std::string name = "tokenizer");
// The model is named after the file stem.
TokenizerModel load(const std::filesystem::path& path);

std::string escape_merge_symbol(std::string_view symbol);
// nullopt on a dangling or unknown escape.
std::optional<std::string> unescape_merge_symbol(std::string_view symbol);

}  // namespace toklab
