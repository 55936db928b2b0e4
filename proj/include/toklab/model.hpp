#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "toklab/core.hpp"

namespace toklab {

// Bijective token <-> id map. Ids may be sparse for hand-built models.
class Vocab {
 public:
  Vocab() = default;
  // Throws ValidationError on duplicate tokens or ids.
  explicit Vocab(std::vector<std::pair<std::string, TokenId>> entries);

  std::size_t size() const { return by_id_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  const std::string* token(TokenId id) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  // Entries ordered by ascending id.
  const std::vector<std::pair<std::string, TokenId>>& entries() const { return by_id_; }

 private:
  std::vector<std::pair<std::string, TokenId>> by_id_;
  std::unordered_map<std::string, TokenId> by_token_;
  std::unordered_map<TokenId, std::size_t> index_of_id_;
};

struct SpecialToken {
  std::string token;
  TokenId id = 0;
  bool prepend = false;
  friend bool operator==(const SpecialToken&, const SpecialToken&) = default;
};

struct Merge {
  std::string left;
  std::string right;
  friend bool operator==(const Merge&, const Merge&) = default;
};

// Plain description of a tokenizer; TokenizerModel validates it.
// Merge rank is the index in `merges`.
struct ModelDefinition {
  std::string name = "tokenizer";
  Algorithm algorithm = Algorithm::kBpe;
  std::vector<std::pair<std::string, TokenId>> vocab;
  std::vector<Merge> merges;
  NormalizerKind normalizer = NormalizerKind::kNfc;
  PretokenizerKind pretokenizer = PretokenizerKind::kWhitespace;
  ByteFallbackMode fallback = ByteFallbackMode::kHex;
  std::vector<SpecialToken> special_tokens;
  std::optional<std::string> unk_token;
};

inline constexpr std::string_view kContinuationPrefix = "##";

// The symbol a merge produces. WordPiece drops the continuation marker of
// the right operand ("a" + "##b" -> "ab", "##a" + "##b" -> "##ab").
std::string merged_symbol(Algorithm algorithm, std::string_view left,
                          std::string_view right);

// Immutable, validated tokenizer. Safe to share across threads.
class TokenizerModel {
 public:
  struct MergeTarget {
    std::uint32_t rank;
    TokenId result;
  };

  // Throws ValidationError naming the offending token or field.
  explicit TokenizerModel(ModelDefinition definition);

  const ModelDefinition& definition() const { return def_; }
  const std::string& name() const { return def_.name; }
  Algorithm algorithm() const { return def_.algorithm; }
  NormalizerKind normalizer() const { return def_.normalizer; }
  PretokenizerKind pretokenizer() const { return def_.pretokenizer; }
  ByteFallbackMode fallback() const { return def_.fallback; }
  const Vocab& vocab() const { return vocab_; }
  const std::vector<Merge>& merges() const { return def_.merges; }
  const std::vector<SpecialToken>& special_tokens() const { return def_.special_tokens; }

  // Vocab entries plus special tokens.
  std::size_t vocab_size() const { return vocab_.size() + def_.special_tokens.size(); }

  // Looks up ordinary vocab entries only.
  std::optional<TokenId> find(std::string_view token) const { return vocab_.find(token); }
  // Token string for any id, vocab or special; nullptr when unknown.
  const std::string* token(TokenId id) const;
  bool is_special(TokenId id) const;
  const std::vector<TokenId>& prepend_ids() const { return prepend_ids_; }
  std::optional<TokenId> unk_id() const { return unk_id_; }

  std::optional<MergeTarget> merge_of(TokenId left, TokenId right) const;

  // Id of "<0xHH>" when present in the vocab.
  std::optional<TokenId> hex_id(std::uint8_t b) const { return hex_ids_[b]; }
  // Byte value if `id` is a hex byte token.
  std::optional<std::uint8_t> hex_byte(TokenId id) const;

  // Id of the display char for byte b (mapped mode); with `continuation`
  // the "##"-prefixed WordPiece form.
  std::optional<TokenId> display_id(std::uint8_t b, bool continuation = false) const;

  // Length in bytes of the longest vocab token, used to bound greedy search.
  std::size_t max_token_bytes() const { return max_token_bytes_; }

 private:
  static std::uint64_t pair_key(TokenId l, TokenId r) {
    return (static_cast<std::uint64_t>(l) << 32) | r;
  }

  ModelDefinition def_;
  Vocab vocab_;
  std::unordered_map<TokenId, std::size_t> specials_by_id_;
  std::vector<TokenId> prepend_ids_;
  std::optional<TokenId> unk_id_;
  std::unordered_map<std::uint64_t, MergeTarget> merge_table_;
  std::vector<std::optional<TokenId>> hex_ids_ = std::vector<std::optional<TokenId>>(256);
  std::unordered_map<TokenId, std::uint8_t> hex_bytes_;
  std::vector<std::optional<TokenId>> display_ids_ = std::vector<std::optional<TokenId>>(512);
  std::size_t max_token_bytes_ = 0;
};

}  // namespace toklab
