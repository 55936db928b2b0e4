#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toklab/model.hpp"

namespace toklab {

enum class PieceKind {
  kToken,    // ordinary vocab token
  kSpecial,  // prepended special token, empty span
  kByte,     // hex byte-fallback token
  kUnknown,  // unk token
};

struct Piece {
  TokenId id = 0;
  ByteSpan span;
  PieceKind kind = PieceKind::kToken;
};

struct Encoding {
  std::string normalized;
  std::vector<Piece> pieces;

  std::vector<TokenId> ids() const;
};

// normalize -> pretokenize -> segment each pretoken -> byte fallback ->
// prepend specials. Throws Utf8Error for invalid input and
// UnrepresentableInput when a unit cannot be encoded at all.
Encoding encode_detailed(const TokenizerModel& model, std::string_view text);
std::vector<TokenId> encode(const TokenizerModel& model, std::string_view text);

struct DecodeResult {
  std::string text;
  // Set when the folded bytes were not valid UTF-8; offending bytes are
  // replaced by U+FFFD.
  bool invalid_utf8 = false;
};

// Throws UnknownId when an id does not resolve.
DecodeResult decode(const TokenizerModel& model, std::span<const TokenId> ids);

struct BreakdownItem {
  std::string display;
  TokenId id = 0;
  ByteSpan span;
  PieceKind kind = PieceKind::kToken;
};

struct TokenBreakdown {
  std::string source_text;  // normalized input the spans index into
  std::vector<BreakdownItem> items;
};

TokenBreakdown token_breakdown(const TokenizerModel& model, std::string_view text);
// Renders an existing encoding without re-encoding.
TokenBreakdown breakdown_of(const TokenizerModel& model, Encoding encoding);

std::string_view to_string(PieceKind kind);

}  // namespace toklab
