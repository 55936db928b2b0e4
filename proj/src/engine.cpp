#include "toklab/engine.hpp"

#include <limits>

#include "toklab/error.hpp"

namespace toklab {

namespace {

[[noreturn]] void unrepresentable(const TokenizerModel& model, std::string_view unit) {
  throw Error(ErrorKind::kUnrepresentableInput,
              "tokenizer '" + model.name() + "' cannot represent '" + std::string(unit) +
                  "' (byte_fallback " + std::string(to_string(model.fallback())) +
                  ", no unk token)");
}

// Fallback for one codepoint that has no vocab entry, outside mapped mode.
void push_fallback(const TokenizerModel& model, std::string_view text, ByteSpan cp,
                   std::vector<Piece>& out) {
  if (model.fallback() == ByteFallbackMode::kHex) {
    bool complete = true;
    for (std::size_t i = cp.begin; i < cp.end; ++i) {
      complete = complete && model.hex_id(static_cast<std::uint8_t>(text[i])).has_value();
    }
    if (complete) {
      for (std::size_t i = cp.begin; i < cp.end; ++i) {
        out.push_back({*model.hex_id(static_cast<std::uint8_t>(text[i])), {i, i + 1}, PieceKind::kByte});
      }
      return;
    }
  }
  if (const auto unk = model.unk_id()) {
    out.push_back({*unk, cp, PieceKind::kUnknown});
    return;
  }
  unrepresentable(model, text.substr(cp.begin, cp.size()));
}

void apply_merges(const TokenizerModel& model, std::vector<Piece>& units) {
  if (model.merges().empty()) return;
  std::vector<Piece> next;
  while (units.size() > 1) {
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    TokenId best_left = 0, best_right = 0, best_result = 0;
    for (std::size_t k = 0; k + 1 < units.size(); ++k) {
      const auto m = model.merge_of(units[k].id, units[k + 1].id);
      if (m && m->rank < best_rank) {
        best_rank = m->rank;
        best_left = units[k].id;
        best_right = units[k + 1].id;
        best_result = m->result;
      }
    }
    if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;
    next.clear();
    for (std::size_t k = 0; k < units.size();) {
      if (k + 1 < units.size() && units[k].id == best_left && units[k + 1].id == best_right) {
        next.push_back({best_result, {units[k].span.begin, units[k + 1].span.end}, PieceKind::kToken});
        k += 2;
      } else {
        next.push_back(units[k]);
        ++k;
      }
    }
    units.swap(next);
  }
}

void segment_bpe(const TokenizerModel& model, std::string_view text, ByteSpan pretoken,
                 std::vector<Piece>& out) {
  std::vector<Piece> units;
  if (model.fallback() == ByteFallbackMode::kMapped) {
    units.reserve(pretoken.size());
    for (std::size_t i = pretoken.begin; i < pretoken.end; ++i) {
      units.push_back({*model.display_id(static_cast<std::uint8_t>(text[i])), {i, i + 1}, PieceKind::kToken});
    }
  } else {
    const std::string_view body = text.substr(pretoken.begin, pretoken.size());
    for (ByteSpan cp : utf8::codepoint_spans(body)) {
      cp = {cp.begin + pretoken.begin, cp.end + pretoken.begin};
      if (const auto id = model.find(text.substr(cp.begin, cp.size()))) {
        units.push_back({*id, cp, PieceKind::kToken});
      } else {
        push_fallback(model, text, cp, units);
      }
    }
  }
  apply_merges(model, units);
  out.insert(out.end(), units.begin(), units.end());
}

// Greedy longest-match-first; positions after the first carry "##".
void segment_wordpiece(const TokenizerModel& model, std::string_view text, ByteSpan pretoken,
                       std::vector<Piece>& out) {
  const bool mapped = model.fallback() == ByteFallbackMode::kMapped;
  std::vector<std::size_t> bounds;  // candidate boundaries, absolute offsets
  if (mapped) {
    for (std::size_t i = pretoken.begin; i <= pretoken.end; ++i) bounds.push_back(i);
  } else {
    const auto spans = utf8::codepoint_spans(text.substr(pretoken.begin, pretoken.size()));
    for (const ByteSpan& s : spans) bounds.push_back(pretoken.begin + s.begin);
    bounds.push_back(pretoken.end);
  }
  const std::size_t max_bytes = model.max_token_bytes();
  const std::size_t mark_start = out.size();
  std::string candidate;
  std::size_t i = 0;
  while (i + 1 < bounds.size()) {
    const std::string_view prefix = i == 0 ? std::string_view{} : kContinuationPrefix;
    bool matched = false;
    for (std::size_t j = bounds.size() - 1; j > i; --j) {
      const std::size_t len = bounds[j] - bounds[i];
      if (len + prefix.size() > max_bytes && j > i + 1) continue;
      candidate.assign(prefix);
      if (mapped) {
        candidate += to_display(text.substr(bounds[i], len));
      } else {
        candidate.append(text.substr(bounds[i], len));
      }
      if (const auto id = model.find(candidate)) {
        out.push_back({*id, {bounds[i], bounds[j]}, PieceKind::kToken});
        i = j;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    // Mapped models always contain every single-byte form, so only hex and
    // none reach this point.
    if (model.fallback() == ByteFallbackMode::kNone) {
      out.resize(mark_start);
      if (!model.unk_id()) unrepresentable(model, text.substr(pretoken.begin, pretoken.size()));
      out.push_back({*model.unk_id(), pretoken, PieceKind::kUnknown});
      return;
    }
    push_fallback(model, text, {bounds[i], bounds[i + 1]}, out);
    ++i;
  }
}

}  // namespace

std::vector<TokenId> Encoding::ids() const {
  std::vector<TokenId> out;
  out.reserve(pieces.size());
  for (const Piece& p : pieces) out.push_back(p.id);
  return out;
}

Encoding encode_detailed(const TokenizerModel& model, std::string_view text) {
  if (const auto bad = utf8::find_invalid(text)) throw Error::utf8(*bad, "encode input");
  Encoding enc;
  enc.normalized = normalize(text, model.normalizer());
  for (const TokenId id : model.prepend_ids()) enc.pieces.push_back({id, {0, 0}, PieceKind::kSpecial});
  const std::string_view norm = enc.normalized;
  for (const Pretoken& pt : pretokenize(norm, model.pretokenizer())) {
    if (model.algorithm() == Algorithm::kBpe) {
      segment_bpe(model, norm, pt.span, enc.pieces);
    } else {
      segment_wordpiece(model, norm, pt.span, enc.pieces);
    }
  }
  return enc;
}

std::vector<TokenId> encode(const TokenizerModel& model, std::string_view text) {
  return encode_detailed(model, text).ids();
}

DecodeResult decode(const TokenizerModel& model, std::span<const TokenId> ids) {
  std::string bytes;
  const bool wordpiece = model.algorithm() == Algorithm::kWordpieceFreq;
  for (const TokenId id : ids) {
    const std::string* token = model.token(id);
    if (!token) {
      throw Error(ErrorKind::kUnknownId,
                  "id " + std::to_string(id) + " is not in tokenizer '" + model.name() + "'");
    }
    if (model.unk_id() == id) {
      bytes += *token;
      continue;
    }
    if (model.is_special(id)) continue;
    if (const auto b = model.hex_byte(id)) {
      bytes += static_cast<char>(*b);
      continue;
    }
    std::string_view body = *token;
    if (wordpiece && body.size() > kContinuationPrefix.size() && body.starts_with(kContinuationPrefix)) {
      body.remove_prefix(kContinuationPrefix.size());
    }
    if (model.fallback() == ByteFallbackMode::kMapped) {
      if (const auto raw = from_display(body)) {
        bytes += *raw;
        continue;
      }
    }
    bytes.append(body);
  }
  DecodeResult result;
  result.invalid_utf8 = !utf8::sanitize(bytes, result.text);
  return result;
}

TokenBreakdown token_breakdown(const TokenizerModel& model, std::string_view text) {
  return breakdown_of(model, encode_detailed(model, text));
}

TokenBreakdown breakdown_of(const TokenizerModel& model, Encoding enc) {
  TokenBreakdown out;
  out.items.reserve(enc.pieces.size());
  for (const Piece& p : enc.pieces) {
    out.items.push_back({*model.token(p.id), p.id, p.span, p.kind});
  }
  out.source_text = std::move(enc.normalized);
  return out;
}

std::string_view to_string(PieceKind kind) {
  switch (kind) {
    case PieceKind::kToken: return "token";
    case PieceKind::kSpecial: return "special";
    case PieceKind::kByte: return "byte";
    case PieceKind::kUnknown: return "unk";
  }
  return "token";
}

}  // namespace toklab
