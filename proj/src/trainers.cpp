#include "toklab/trainers.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "toklab/error.hpp"

namespace toklab {

PairCounts count_pairs(const std::vector<SymbolSequence>& sequences) {
  PairCounts counts;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const SymbolSequence& seq = sequences[s];
    if (seq.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "sequence " + std::to_string(s) + " is empty");
    }
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[{seq[i], seq[i + 1]}];
  }
  return counts;
}

PairCounts count_subword_pairs(const std::vector<SymbolSequence>& sequences) {
  return count_pairs(sequences);
}

SymbolSequence initial_symbols(std::string_view pretoken, Algorithm algorithm,
                               ByteFallbackMode fallback) {
  SymbolSequence out;
  if (fallback == ByteFallbackMode::kMapped) {
    for (const char c : pretoken) out.push_back(byte_display_string(static_cast<std::uint8_t>(c)));
  } else {
    for (const ByteSpan& s : utf8::codepoint_spans(pretoken)) {
      out.emplace_back(pretoken.substr(s.begin, s.size()));
    }
  }
  if (algorithm == Algorithm::kWordpieceFreq) {
    for (std::size_t i = 1; i < out.size(); ++i) out[i].insert(0, kContinuationPrefix);
  }
  return out;
}

namespace {

using SymbolId = std::uint32_t;

std::uint64_t key_of(SymbolId l, SymbolId r) { return (static_cast<std::uint64_t>(l) << 32) | r; }
SymbolId left_of(std::uint64_t key) { return static_cast<SymbolId>(key >> 32); }
SymbolId right_of(std::uint64_t key) { return static_cast<SymbolId>(key & 0xFFFFFFFFu); }

struct Word {
  std::vector<SymbolId> symbols;
  std::uint64_t freq = 0;
};

// Incremental pair statistics over distinct pretokens, weighted by their
// corpus frequency.
class MergeState {
 public:
  MergeState() = default;
  MergeState(const MergeState&) = delete;
  MergeState& operator=(const MergeState&) = delete;

  SymbolId intern(const std::string& s) {
    const auto [it, inserted] = index_.emplace(s, static_cast<SymbolId>(strings_.size()));
    if (inserted) strings_.push_back(s);
    return it->second;
  }
  const std::string& str(SymbolId id) const { return strings_[id]; }

  void add_word(const SymbolSequence& symbols, std::uint64_t freq) {
    Word w;
    w.freq = freq;
    for (const auto& s : symbols) w.symbols.push_back(intern(s));
    const auto idx = static_cast<std::uint32_t>(words_.size());
    words_.push_back(std::move(w));
    for (std::size_t i = 0; i + 1 < words_[idx].symbols.size(); ++i) {
      const auto key = key_of(words_[idx].symbols[i], words_[idx].symbols[i + 1]);
      pending_[key] += static_cast<std::int64_t>(freq);
      where_[key].insert(idx);
    }
  }

  void flush() {
    for (const auto& [key, delta] : pending_) {
      if (delta == 0 || banned_.contains(key)) continue;
      std::uint64_t& count = counts_[key];
      if (count > 0) ranking_.erase({count, key});
      count = static_cast<std::uint64_t>(static_cast<std::int64_t>(count) + delta);
      if (count > 0) ranking_.insert({count, key});
      else counts_.erase(key);
    }
    pending_.clear();
  }

  // Most frequent pair, ties broken by smallest (left, right) strings.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> best() const {
    if (ranking_.empty()) return std::nullopt;
    return *ranking_.begin();
  }

  // Replaces every non-overlapping left-to-right occurrence of the pair.
  void merge(std::uint64_t key, SymbolId result) {
    const SymbolId l = left_of(key), r = right_of(key);
    const auto it = where_.find(key);
    if (it == where_.end()) return;
    const std::vector<std::uint32_t> affected(it->second.begin(), it->second.end());
    std::vector<SymbolId> merged;
    for (const std::uint32_t idx : affected) {
      Word& w = words_[idx];
      merged.clear();
      bool changed = false;
      for (std::size_t i = 0; i < w.symbols.size();) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == l && w.symbols[i + 1] == r) {
          merged.push_back(result);
          i += 2;
          changed = true;
        } else {
          merged.push_back(w.symbols[i]);
          ++i;
        }
      }
      if (!changed) continue;
      const auto delta = static_cast<std::int64_t>(w.freq);
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
        pending_[key_of(w.symbols[i], w.symbols[i + 1])] -= delta;
      }
      for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        const auto k = key_of(merged[i], merged[i + 1]);
        pending_[k] += delta;
        where_[k].insert(idx);
      }
      w.symbols.swap(merged);
    }
    where_.erase(key);
    flush();
  }

  // Removes a pair from consideration for the rest of training.
  void ban(std::uint64_t key) {
    if (const auto it = counts_.find(key); it != counts_.end()) {
      ranking_.erase({it->second, key});
      counts_.erase(it);
    }
    banned_.insert(key);
  }

  const std::vector<Word>& words() const { return words_; }

 private:
  struct RankOrder {
    const MergeState* state;
    bool operator()(const std::pair<std::uint64_t, std::uint64_t>& a,
                    const std::pair<std::uint64_t, std::uint64_t>& b) const {
      if (a.first != b.first) return a.first > b.first;
      const std::string& al = state->str(left_of(a.second));
      const std::string& bl = state->str(left_of(b.second));
      if (al != bl) return al < bl;
      return state->str(right_of(a.second)) < state->str(right_of(b.second));
    }
  };

  std::vector<std::string> strings_;
  std::unordered_map<std::string, SymbolId> index_;
  std::vector<Word> words_;
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
  std::unordered_map<std::uint64_t, std::int64_t> pending_;
  std::unordered_map<std::uint64_t, std::unordered_set<std::uint32_t>> where_;
  std::unordered_set<std::uint64_t> banned_;
  std::set<std::pair<std::uint64_t, std::uint64_t>, RankOrder> ranking_{RankOrder{this}};
};

TokenizerModel train_frequency(const Corpus& corpus, const TrainConfig& config,
                               TrainingTrace* trace) {
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "training corpus has no records");
  if (config.min_pair_count == 0) {
    throw Error(ErrorKind::kInvalidArgument, "min_pair_count must be positive");
  }
  const Algorithm algorithm = config.algorithm;

  std::map<std::string, std::uint64_t> pretoken_freq;
  for (const Record& record : corpus.records) {
    if (const auto bad = utf8::find_invalid(record.text)) {
      throw Error::utf8(*bad, "record '" + record.id + "'");
    }
    const std::string norm = normalize(record.text, config.normalizer);
    for (const Pretoken& pt : pretokenize(norm, config.pretokenizer)) ++pretoken_freq[std::string(pt.text)];
  }
  if (pretoken_freq.empty()) throw Error(ErrorKind::kEmptyCorpus, "training corpus contains no text");

  MergeState state;
  std::set<std::string> observed;
  for (const auto& [pretoken, freq] : pretoken_freq) {
    SymbolSequence symbols = initial_symbols(pretoken, algorithm, config.fallback);
    observed.insert(symbols.begin(), symbols.end());
    state.add_word(symbols, freq);
  }
  state.flush();

  // Special tokens, then the base alphabet, then merge results.
  std::vector<SpecialToken> specials;
  for (const SpecialTokenConfig& st : config.special_tokens) {
    specials.push_back({st.token, static_cast<TokenId>(specials.size()), st.prepend});
  }
  std::optional<std::string> unk = config.unk_token;
  if (!unk && config.fallback == ByteFallbackMode::kNone) unk = "<unk>";
  if (unk && std::none_of(specials.begin(), specials.end(),
                          [&](const SpecialToken& st) { return st.token == *unk; })) {
    specials.push_back({*unk, static_cast<TokenId>(specials.size()), false});
  }

  std::vector<std::string> alphabet;
  if (config.fallback == ByteFallbackMode::kMapped) {
    for (unsigned b = 0; b < 256; ++b) alphabet.push_back(byte_display_string(static_cast<std::uint8_t>(b)));
    if (algorithm == Algorithm::kWordpieceFreq) {
      for (unsigned b = 0; b < 256; ++b) {
        alphabet.push_back(std::string(kContinuationPrefix) + byte_display_string(static_cast<std::uint8_t>(b)));
      }
    }
  } else {
    if (config.fallback == ByteFallbackMode::kHex) {
      for (unsigned b = 0; b < 256; ++b) alphabet.push_back(byte_hex_token(static_cast<std::uint8_t>(b)));
    }
    std::unordered_set<std::string> present(alphabet.begin(), alphabet.end());
    for (const std::string& s : observed) {
      if (!present.contains(s)) alphabet.push_back(s);
    }
  }

  const std::size_t base_size = specials.size() + alphabet.size();
  if (config.target_vocab_size < base_size) {
    throw Error(ErrorKind::kVocabTargetBelowAlphabet,
                "target vocab size " + std::to_string(config.target_vocab_size) +
                    " is below the base alphabet size " + std::to_string(base_size) + " (" +
                    std::to_string(specials.size()) + " special + " +
                    std::to_string(alphabet.size()) + " alphabet)");
  }

  ModelDefinition def;
  def.name = config.name;
  def.algorithm = algorithm;
  def.normalizer = config.normalizer;
  def.pretokenizer = config.pretokenizer;
  def.fallback = config.fallback;
  def.unk_token = unk;
  def.special_tokens = specials;
  TokenId next_id = static_cast<TokenId>(specials.size());
  std::unordered_set<std::string> in_vocab;
  for (const std::string& s : alphabet) {
    def.vocab.emplace_back(s, next_id++);
    in_vocab.insert(s);
  }

  // Strings a merge must never produce: they would alias a special or a
  // hex byte token and break decoding.
  std::unordered_set<std::string> reserved;
  for (const SpecialToken& st : specials) reserved.insert(st.token);
  if (config.fallback == ByteFallbackMode::kHex) {
    for (unsigned b = 0; b < 256; ++b) reserved.insert(byte_hex_token(static_cast<std::uint8_t>(b)));
  }

  std::size_t size = base_size;
  while (size < config.target_vocab_size) {
    const auto best = state.best();
    if (!best || best->first < config.min_pair_count) break;
    const auto [count, key] = *best;
    const std::string& left = state.str(left_of(key));
    const std::string& right = state.str(right_of(key));
    std::string result = merged_symbol(algorithm, left, right);
    if (reserved.contains(result)) {
      state.ban(key);
      continue;
    }
    def.merges.push_back({left, right});
    if (trace) trace->steps.push_back({left, right, count});
    if (in_vocab.insert(result).second) {
      def.vocab.emplace_back(result, next_id++);
      ++size;
    }
    state.merge(key, state.intern(result));
  }

  if (trace) {
    trace->segmentation.clear();
    auto word = state.words().begin();
    for (const auto& entry : pretoken_freq) {
      SymbolSequence seq;
      for (const SymbolId id : word->symbols) seq.push_back(state.str(id));
      trace->segmentation.emplace(entry.first, std::move(seq));
      ++word;
    }
  }
  return TokenizerModel(std::move(def));
}

}  // namespace

TokenizerModel train_bpe(const Corpus& corpus, const TrainConfig& config, TrainingTrace* trace) {
  if (config.algorithm != Algorithm::kBpe) {
    throw Error(ErrorKind::kInvalidArgument, "train_bpe requires algorithm 'bpe'");
  }
  return train_frequency(corpus, config, trace);
}

TokenizerModel train_wordpiece(const Corpus& corpus, const TrainConfig& config,
                               TrainingTrace* trace) {
  if (config.algorithm != Algorithm::kWordpieceFreq) {
    throw Error(ErrorKind::kInvalidArgument, "train_wordpiece requires algorithm 'wordpiece_freq'");
  }
  return train_frequency(corpus, config, trace);
}

TokenizerModel train(const Corpus& corpus, const TrainConfig& config, TrainingTrace* trace) {
  return config.algorithm == Algorithm::kBpe ? train_bpe(corpus, config, trace)
                                             : train_wordpiece(corpus, config, trace);
}

}  // namespace toklab
