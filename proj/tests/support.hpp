#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "toklab/model.hpp"
#include "toklab/trainers.hpp"

namespace toklab::testing {

// Vocab from a token list; ids follow list order starting at `first_id`.
std::vector<std::pair<std::string, TokenId>> numbered(const std::vector<std::string>& tokens,
                                                      TokenId first_id = 0);

ModelDefinition simple_definition(const std::vector<std::string>& tokens,
                                  std::vector<Merge> merges = {},
                                  ByteFallbackMode fallback = ByteFallbackMode::kHex);

// Adds all 256 "<0xHH>" tokens after the existing ids.
void add_hex_tokens(ModelDefinition& def);

struct OracleStep {
  std::string left;
  std::string right;
  std::uint64_t count = 0;
  friend bool operator==(const OracleStep&, const OracleStep&) = default;
};

// Brute-force BPE: recounts every adjacent pair over every pretoken
// occurrence from scratch at each step. Mirrors the trainer's stopping rule
// (vocab target counting only new symbols, min_pair_count) with hex fallback,
// whitespace pretokenization and no specials.
std::vector<OracleStep> oracle_bpe(const std::vector<std::string>& texts,
                                   std::size_t target_vocab_size,
                                   std::uint64_t min_pair_count);

// Random UTF-8 strings mixing ASCII, Bengali-Assamese, emoji and arbitrary
// scalar values.
std::string random_text(std::mt19937_64& rng, std::size_t max_codepoints);

// Small random model: sparse ids, merges over a pool that includes spaces,
// backslashes and multi-byte symbols, a random fallback, normalizer and
// pretokenizer, and up to two specials.
ModelDefinition random_definition(std::mt19937_64& rng);

// Text drawn mostly from the random_definition symbol pool.
std::string random_probe(std::mt19937_64& rng, std::size_t max_symbols);

// Hand-built tokenizers whose segmentation of the fixture sentence gives the
// token counts of the five commercial tokenizers: 16, 19, 29, 49, 52.
struct StubSpec {
  std::string name;
  std::size_t expected_tokens;
};
std::vector<StubSpec> stub_specs();
TokenizerModel stub_tokenizer(const std::string& name);

}  // namespace toklab::testing
