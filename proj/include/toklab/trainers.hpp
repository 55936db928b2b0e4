#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toklab/corpus.hpp"
#include "toklab/model.hpp"

namespace toklab {

using SymbolSequence = std::vector<std::string>;
// Ordered (left, right) -> occurrence count.
using PairCounts = std::map<std::pair<std::string, std::string>, std::uint64_t>;

// Adjacent pair occurrences within each sequence, never across sequences.
// Overlapping occurrences count per position. Throws InvalidArgument on an
// empty sequence.
PairCounts count_pairs(const std::vector<SymbolSequence>& sequences);
// WordPiece's subword-pair count. Same occurrence count as count_pairs.
PairCounts count_subword_pairs(const std::vector<SymbolSequence>& sequences);

struct SpecialTokenConfig {
  std::string token;
  bool prepend = false;
};

struct TrainConfig {
  // Counts vocab entries plus special tokens, like TokenizerModel::vocab_size.
  std::size_t target_vocab_size = 1000;
  std::uint64_t min_pair_count = 2;
  Algorithm algorithm = Algorithm::kBpe;
  PretokenizerKind pretokenizer = PretokenizerKind::kWhitespace;
  NormalizerKind normalizer = NormalizerKind::kNfc;
  ByteFallbackMode fallback = ByteFallbackMode::kHex;
  std::vector<SpecialTokenConfig> special_tokens;
  // Defaults to "<unk>" when fallback is none.
  std::optional<std::string> unk_token;
  std::string name = "trained";
};

struct MergeStep {
  std::string left;
  std::string right;
  std::uint64_t count = 0;
};

// Optional training diagnostics.
struct TrainingTrace {
  std::vector<MergeStep> steps;
  // Final segmentation of every distinct pretoken seen during training.
  std::map<std::string, SymbolSequence> segmentation;
};

// Initial symbols of one pretoken: codepoints, or display chars of its bytes
// under mapped fallback; WordPiece marks non-initial symbols with "##".
SymbolSequence initial_symbols(std::string_view pretoken, Algorithm algorithm,
                               ByteFallbackMode fallback);

// Greedy most-frequent-pair merging. Ties go to the lexicographically
// smallest (left, right) by codepoint. Throws EmptyCorpus or
// VocabTargetBelowAlphabet.
TokenizerModel train_bpe(const Corpus& corpus, const TrainConfig& config,
                         TrainingTrace* trace = nullptr);
TokenizerModel train_wordpiece(const Corpus& corpus, const TrainConfig& config,
                               TrainingTrace* trace = nullptr);
// Dispatches on config.algorithm.
TokenizerModel train(const Corpus& corpus, const TrainConfig& config,
                     TrainingTrace* trace = nullptr);

}  // namespace toklab
