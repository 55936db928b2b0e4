#include "toklab/model.hpp"

#include <algorithm>
#include <unordered_set>

#include "toklab/error.hpp"

namespace toklab {

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::kValidationError, message);
}

std::string quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

std::string merge_label(const Merge& m, std::size_t rank) {
  return "merge " + quoted(m.left + " " + m.right) + " (rank " + std::to_string(rank) + ")";
}

bool starts_with_marker(std::string_view s) {
  return s.size() > kContinuationPrefix.size() && s.starts_with(kContinuationPrefix);
}

}  // namespace

Vocab::Vocab(std::vector<std::pair<std::string, TokenId>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  by_token_.reserve(entries.size());
  index_of_id_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [token, id] = entries[i];
    if (token.empty()) invalid("vocab: empty token string for id " + std::to_string(id));
    if (!utf8::is_valid(token)) invalid("vocab: token for id " + std::to_string(id) + " is not valid UTF-8");
    if (i > 0 && entries[i - 1].second == id) {
      invalid("vocab: duplicate id " + std::to_string(id) + " for tokens " +
              quoted(entries[i - 1].first) + " and " + quoted(token));
    }
    const auto [it, inserted] = by_token_.emplace(token, id);
    if (!inserted) {
      invalid("vocab: duplicate token " + quoted(token) + " with ids " +
              std::to_string(it->second) + " and " + std::to_string(id));
    }
    index_of_id_.emplace(id, i);
  }
  by_id_ = std::move(entries);
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  // Heterogeneous lookup needs C++20 transparent hashing; a temporary is fine.
  const auto it = by_token_.find(std::string(token));
  if (it == by_token_.end()) return std::nullopt;
  return it->second;
}

const std::string* Vocab::token(TokenId id) const {
  const auto it = index_of_id_.find(id);
  return it == index_of_id_.end() ? nullptr : &by_id_[it->second].first;
}

std::string merged_symbol(Algorithm algorithm, std::string_view left,
                          std::string_view right) {
  std::string out(left);
  if (algorithm == Algorithm::kWordpieceFreq && starts_with_marker(right)) {
    right.remove_prefix(kContinuationPrefix.size());
  }
  out.append(right);
  return out;
}

TokenizerModel::TokenizerModel(ModelDefinition definition)
    : def_(std::move(definition)), vocab_(def_.vocab) {
  for (const auto& [token, id] : vocab_.entries()) {
    max_token_bytes_ = std::max(max_token_bytes_, token.size());
    if (const auto b = parse_byte_hex_token(token);
        b && def_.fallback == ByteFallbackMode::kHex) {
      hex_ids_[*b] = id;
      hex_bytes_.emplace(id, *b);
    }
  }

  std::unordered_set<std::string> special_names;
  for (std::size_t i = 0; i < def_.special_tokens.size(); ++i) {
    const SpecialToken& st = def_.special_tokens[i];
    const std::string label = "special token " + quoted(st.token);
    if (st.token.empty()) invalid("special_tokens[" + std::to_string(i) + "]: empty token");
    if (const std::string* clash = vocab_.token(st.id)) {
      invalid(label + ": id " + std::to_string(st.id) + " collides with vocab token " + quoted(*clash));
    }
    if (vocab_.contains(st.token)) invalid(label + ": also present as an ordinary vocab entry");
    if (!special_names.insert(st.token).second) invalid(label + ": declared twice");
    if (!specials_by_id_.emplace(st.id, i).second) {
      invalid(label + ": id " + std::to_string(st.id) + " already used by special token " +
              quoted(def_.special_tokens[specials_by_id_[st.id]].token));
    }
  }
  // Prepend specials keep declaration order.
  for (const SpecialToken& st : def_.special_tokens) {
    if (st.prepend) prepend_ids_.push_back(st.id);
  }

  if (def_.unk_token) {
    if (const auto id = vocab_.find(*def_.unk_token)) {
      unk_id_ = *id;
    } else {
      const auto it = std::find_if(def_.special_tokens.begin(), def_.special_tokens.end(),
                                   [&](const SpecialToken& st) { return st.token == *def_.unk_token; });
      if (it == def_.special_tokens.end()) {
        invalid("unk_token " + quoted(*def_.unk_token) + " is neither a vocab entry nor a special token");
      }
      if (it->prepend) invalid("unk_token " + quoted(*def_.unk_token) + " cannot be a prepend special");
      unk_id_ = it->id;
    }
  } else if (def_.fallback == ByteFallbackMode::kNone) {
    invalid("byte_fallback 'none' requires unk_token");
  }

  if (def_.fallback == ByteFallbackMode::kMapped) {
    const bool wordpiece = def_.algorithm == Algorithm::kWordpieceFreq;
    for (unsigned b = 0; b < 256; ++b) {
      const std::string& display = byte_display_string(static_cast<std::uint8_t>(b));
      const auto id = vocab_.find(display);
      if (!id) {
        invalid("byte_fallback 'mapped' requires token " + quoted(display) + " for byte " +
                byte_hex_token(static_cast<std::uint8_t>(b)));
      }
      display_ids_[b] = *id;
      if (wordpiece) {
        const std::string cont = std::string(kContinuationPrefix) + display;
        const auto cid = vocab_.find(cont);
        if (!cid) {
          invalid("byte_fallback 'mapped' requires token " + quoted(cont) + " for byte " +
                  byte_hex_token(static_cast<std::uint8_t>(b)));
        }
        display_ids_[256 + b] = *cid;
      }
    }
  }

  // Symbols that need no merge to exist: one codepoint (optionally behind
  // the continuation marker) or a hex byte token.
  const auto atomic = [&](std::string_view symbol) {
    if (parse_byte_hex_token(symbol)) return true;
    if (def_.algorithm == Algorithm::kWordpieceFreq && starts_with_marker(symbol)) {
      symbol.remove_prefix(kContinuationPrefix.size());
    }
    return utf8::count_codepoints(symbol) == 1;
  };

  std::unordered_map<std::string, std::size_t> created_at;
  merge_table_.reserve(def_.merges.size());
  for (std::size_t rank = 0; rank < def_.merges.size(); ++rank) {
    const Merge& m = def_.merges[rank];
    const std::string label = merge_label(m, rank);
    TokenId operand_ids[2];
    const std::string* operands[2] = {&m.left, &m.right};
    for (int k = 0; k < 2; ++k) {
      const std::string& symbol = *operands[k];
      const auto id = vocab_.find(symbol);
      if (!id) invalid(label + " references unknown symbol " + quoted(symbol));
      if (!atomic(symbol) && !created_at.contains(symbol)) {
        invalid(label + " references " + quoted(symbol) +
                " before any earlier merge creates it");
      }
      operand_ids[k] = *id;
    }
    const std::string result = merged_symbol(def_.algorithm, m.left, m.right);
    const auto result_id = vocab_.find(result);
    if (!result_id) invalid(label + " produces " + quoted(result) + " which is not in the vocab");
    const auto [it, inserted] = merge_table_.emplace(
        pair_key(operand_ids[0], operand_ids[1]),
        MergeTarget{static_cast<std::uint32_t>(rank), *result_id});
    if (!inserted) {
      invalid(label + " duplicates the merge at rank " + std::to_string(it->second.rank));
    }
    created_at.emplace(result, rank);
  }
}

const std::string* TokenizerModel::token(TokenId id) const {
  if (const std::string* t = vocab_.token(id)) return t;
  const auto it = specials_by_id_.find(id);
  return it == specials_by_id_.end() ? nullptr : &def_.special_tokens[it->second].token;
}

bool TokenizerModel::is_special(TokenId id) const { return specials_by_id_.contains(id); }

std::optional<TokenizerModel::MergeTarget> TokenizerModel::merge_of(TokenId left,
                                                                    TokenId right) const {
  const auto it = merge_table_.find(pair_key(left, right));
  if (it == merge_table_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint8_t> TokenizerModel::hex_byte(TokenId id) const {
  const auto it = hex_bytes_.find(id);
  if (it == hex_bytes_.end()) return std::nullopt;
  return it->second;
}

std::optional<TokenId> TokenizerModel::display_id(std::uint8_t b, bool continuation) const {
  return display_ids_[continuation ? 256 + b : b];
}

}  // namespace toklab
