#include "support.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "toklab/core.hpp"

namespace toklab::testing {

std::vector<std::pair<std::string, TokenId>> numbered(const std::vector<std::string>& tokens,
                                                      TokenId first_id) {
  std::vector<std::pair<std::string, TokenId>> out;
  for (const std::string& t : tokens) out.emplace_back(t, first_id++);
  return out;
}

ModelDefinition simple_definition(const std::vector<std::string>& tokens, std::vector<Merge> merges,
                                  ByteFallbackMode fallback) {
  ModelDefinition def;
  def.name = "mini";
  def.vocab = numbered(tokens);
  def.merges = std::move(merges);
  def.fallback = fallback;
  return def;
}

void add_hex_tokens(ModelDefinition& def) {
  TokenId next = 0;
  for (const auto& entry : def.vocab) next = std::max(next, entry.second + 1);
  for (const SpecialToken& st : def.special_tokens) next = std::max(next, st.id + 1);
  for (unsigned b = 0; b < 256; ++b) def.vocab.emplace_back(byte_hex_token(static_cast<std::uint8_t>(b)), next++);
}

namespace {

const std::vector<std::string>& symbol_pool() {
  static const std::vector<std::string> pool{"a", "b", "c", "d", " ", "\\", "#", "\u099C", "\u09BF", "\u09F0",
                                             "\U0001F600", "x", "\u00E9"};
  return pool;
}

}  // namespace

ModelDefinition random_definition(std::mt19937_64& rng) {
  ModelDefinition def;
  def.name = "random";
  def.algorithm = rng() % 5 == 0 ? Algorithm::kWordpieceFreq : Algorithm::kBpe;
  const ByteFallbackMode modes[] = {ByteFallbackMode::kHex, ByteFallbackMode::kMapped, ByteFallbackMode::kNone};
  def.fallback = modes[rng() % 3];
  def.normalizer = rng() % 2 ? NormalizerKind::kNfc : NormalizerKind::kNone;
  const PretokenizerKind kinds[] = {PretokenizerKind::kNone, PretokenizerKind::kWhitespace,
                                    PretokenizerKind::kByteLevel};
  def.pretokenizer = kinds[rng() % 3];

  std::vector<std::string> symbols;
  std::set<std::string> seen;
  auto add = [&](const std::string& s) {
    if (seen.insert(s).second) symbols.push_back(s);
  };
  if (def.fallback == ByteFallbackMode::kMapped) {
    for (unsigned b = 0; b < 256; ++b) {
      add(byte_display_string(static_cast<std::uint8_t>(b)));
      if (def.algorithm == Algorithm::kWordpieceFreq) add("##" + byte_display_string(static_cast<std::uint8_t>(b)));
    }
  }
  std::vector<std::string> pool = symbol_pool();
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t base = 3 + rng() % 6;
  for (std::size_t i = 0; i < base; ++i) {
    add(pool[i]);
    if (def.algorithm == Algorithm::kWordpieceFreq) add("##" + pool[i]);
  }

  if (def.algorithm == Algorithm::kBpe) {
    std::set<std::pair<std::string, std::string>> used;
    const std::size_t wanted = rng() % 16;
    for (std::size_t attempt = 0; attempt < 60 && def.merges.size() < wanted; ++attempt) {
      const std::string& l = symbols[rng() % symbols.size()];
      const std::string& r = symbols[rng() % symbols.size()];
      if (seen.contains(l + r) || !used.insert({l, r}).second) continue;
      def.merges.push_back({l, r});
      add(l + r);
    }
  } else {
    // A few whole-word and continuation entries for greedy matching.
    for (int i = 0; i < 4; ++i) {
      const std::string w = pool[rng() % base] + pool[rng() % base];
      add(w);
      add("##" + w);
    }
  }

  TokenId id = static_cast<TokenId>(rng() % 1000);
  std::shuffle(symbols.begin(), symbols.end(), rng);
  for (const std::string& s : symbols) {
    def.vocab.emplace_back(s, id);
    id += 1 + static_cast<TokenId>(rng() % 3);
  }
  if (def.fallback == ByteFallbackMode::kHex) add_hex_tokens(def);
  id = 0;
  for (const auto& entry : def.vocab) id = std::max(id, entry.second + 1);
  id += static_cast<TokenId>(rng() % 300000);
  if (rng() % 2) def.special_tokens.push_back({"<bos>", id++, rng() % 2 == 0});
  if (def.fallback == ByteFallbackMode::kNone || rng() % 3 == 0) {
    def.special_tokens.push_back({"<unk>", id++, false});
    def.unk_token = "<unk>";
  }
  return def;
}

std::string random_probe(std::mt19937_64& rng, std::size_t max_symbols) {
  const auto& pool = symbol_pool();
  std::string out;
  const std::size_t n = rng() % (max_symbols + 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() % 10 == 0) out += random_text(rng, 1);
    else out += pool[rng() % pool.size()];
  }
  return out;
}

namespace {

// Leading spaces join the next word; a trailing run stands alone.
std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size() && text[j] == ' ') ++j;
    while (j < text.size() && text[j] != ' ') ++j;
    out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::vector<OracleStep> oracle_bpe(const std::vector<std::string>& texts, std::size_t target_vocab_size,
                                   std::uint64_t min_pair_count) {
  std::vector<std::vector<std::string>> seqs;
  std::set<std::string> vocab;
  for (const std::string& text : texts) {
    for (const std::string& word : split_words(text)) {
      std::vector<std::string> seq;
      for (const char c : word) {
        if (static_cast<unsigned char>(c) >= 0x80) throw std::invalid_argument("oracle expects ASCII");
        seq.emplace_back(1, c);
        vocab.insert(seq.back());
      }
      seqs.push_back(std::move(seq));
    }
  }
  std::size_t size = 256 + vocab.size();
  std::vector<OracleStep> steps;
  while (size < target_vocab_size) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
    for (const auto& seq : seqs) {
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[{seq[i], seq[i + 1]}];
    }
    // std::map iterates pairs in ascending order, so the first maximum wins
    // ties.
    const std::pair<const std::pair<std::string, std::string>, std::uint64_t>* best = nullptr;
    for (const auto& entry : counts) {
      if (!best || entry.second > best->second) best = &entry;
    }
    if (!best || best->second < min_pair_count) break;
    const auto [left, right] = best->first;
    steps.push_back({left, right, best->second});
    const std::string result = left + right;
    for (auto& seq : seqs) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < seq.size();) {
        if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
          next.push_back(result);
          i += 2;
        } else {
          next.push_back(seq[i++]);
        }
      }
      seq.swap(next);
    }
    if (vocab.insert(result).second) ++size;
  }
  return steps;
}

std::string random_text(std::mt19937_64& rng, std::size_t max_codepoints) {
  std::uniform_int_distribution<std::size_t> len_dist(0, max_codepoints);
  std::uniform_int_distribution<int> kind(0, 9);
  std::string out;
  const std::size_t n = len_dist(rng);
  for (std::size_t i = 0; i < n; ++i) {
    char32_t cp = 0;
    const int k = kind(rng);
    if (k < 3) {
      cp = std::uniform_int_distribution<char32_t>(0x20, 0x7E)(rng);
    } else if (k < 7) {
      cp = std::uniform_int_distribution<char32_t>(0x0980, 0x09FF)(rng);
    } else if (k < 8) {
      cp = std::uniform_int_distribution<char32_t>(0x1F300, 0x1FAFF)(rng);
    } else {
      do {
        cp = std::uniform_int_distribution<char32_t>(1, 0x10FFFF)(rng);
      } while (cp >= 0xD800 && cp <= 0xDFFF);
    }
    utf8::append(out, cp);
  }
  return out;
}

namespace {

using Segmentation = std::vector<std::vector<std::string>>;

struct StubDef {
  std::string name;
  std::size_t expected;
  Segmentation words;
  std::vector<std::string> dropped;  // characters left to hex fallback
  std::optional<SpecialToken> special;
};

std::vector<std::string> chars_of(std::string_view s) {
  std::vector<std::string> out;
  for (const ByteSpan& sp : utf8::codepoint_spans(s)) out.emplace_back(s.substr(sp.begin, sp.size()));
  return out;
}

// Each word split into single codepoints.
Segmentation single_chars() {
  Segmentation out;
  for (const std::string w : {"জীৱনৰ", " পৰিসৰে", " মোহিত", " হোৱাটো", " বাঞ্ছনীয়"}) out.push_back(chars_of(w));
  return out;
}

std::vector<StubDef> stub_defs() {
  std::vector<StubDef> defs;
  defs.push_back({"sutra_like", 16,
                  {{"জীৱনৰ"}, {" পৰি", "স", "ৰে"}, {" মো", "হি", "ত"}, {" হো", "ৱা", "টো"},
                   {" বা", "ঞ্ছ", "নী", "য", "়"}},
                  {},
                  SpecialToken{"eng_Latn", 256012, true}});
  defs.push_back({"gpt4o_like", 19,
                  {{"জ", "ীৱ", "নৰ"}, {" পৰ", "িস", "ৰে"}, {" মো", "হি", "ত"}, {" হো", "ৱা", "টো"},
                   {" বা", "ঞ", "্", "ছ", "নী", "য", "়"}},
                  {},
                  std::nullopt});
  defs.push_back({"gemma_like", 29,
                  {{"জ", "ী", "ৱ", "ন", "ৰ"}, {" প", "ৰ", "ি", "স", "ৰে"}, {" ম", "ো", "হ", "ি", "ত"},
                   {" হ", "ো", "ৱ", "া", "টো"}, {" ব", "া", "ঞ", "্", "ছ", "ন", "ী", "য়"}},
                  {},
                  SpecialToken{"<bos>", 2, true}});
  Segmentation llama = {{"জী", "ৱ", "ন", "ৰ"}};
  for (std::size_t w = 1; w < 5; ++w) {
    std::vector<std::string> pieces{" "};
    const auto chars = single_chars()[w];
    pieces.insert(pieces.end(), chars.begin() + 1, chars.end());
    llama.push_back(pieces);
  }
  defs.push_back({"llama_like", 49, llama, {"ৰ", "ো", "জ", "প"},
                  SpecialToken{"<|begin_of_text|>", 128000, true}});
  defs.push_back({"mistral_like", 52, single_chars(), {"ৰ", "ো", "ি"}, SpecialToken{"<s>", 1, true}});
  return defs;
}

}  // namespace

std::vector<StubSpec> stub_specs() {
  std::vector<StubSpec> out;
  for (const StubDef& d : stub_defs()) out.push_back({d.name, d.expected});
  return out;
}

TokenizerModel stub_tokenizer(const std::string& name) {
  for (const StubDef& d : stub_defs()) {
    if (d.name != name) continue;
    std::set<std::string> pieces;
    for (const auto& word : d.words) {
      for (std::size_t i = 0; i < word.size(); ++i) {
        pieces.insert(i == 0 ? word[i] : std::string(kContinuationPrefix) + word[i]);
      }
    }
    for (const std::string& c : d.dropped) {
      pieces.erase(c);
      pieces.erase(std::string(kContinuationPrefix) + c);
    }
    ModelDefinition def;
    def.name = d.name;
    def.algorithm = Algorithm::kWordpieceFreq;
    def.fallback = ByteFallbackMode::kHex;
    // Ids start past the largest small special id, mimicking sparse
    // commercial vocabularies.
    TokenId next = 3;
    for (unsigned b = 0; b < 256; ++b) def.vocab.emplace_back(byte_hex_token(static_cast<std::uint8_t>(b)), next++);
    for (const std::string& p : pieces) def.vocab.emplace_back(p, next++);
    if (d.special) def.special_tokens.push_back(*d.special);
    return TokenizerModel(std::move(def));
  }
  throw std::invalid_argument("unknown stub " + name);
}

}  // namespace toklab::testing
