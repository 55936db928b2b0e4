#include "toklab/core.hpp"

#include <unicode/bytestream.h>
#include <unicode/normalizer2.h>
#include <unicode/stringpiece.h>
#include <unicode/uchar.h>

#include <cstdio>

#include "toklab/error.hpp"

namespace toklab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kVocabTargetBelowAlphabet: return "VocabTargetBelowAlphabet";
    case ErrorKind::kUnrepresentableInput: return "UnrepresentableInput";
    case ErrorKind::kUnknownId: return "UnknownId";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kSchemaError: return "SchemaError";
    case ErrorKind::kValidationError: return "ValidationError";
    case ErrorKind::kIoFailure: return "IoFailure";
    case ErrorKind::kUtf8Error: return "Utf8Error";
    case ErrorKind::kZeroBaseline: return "ZeroBaseline";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kEmptySet: return "EmptySet";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kEncodeFailure: return "EncodeFailure";
  }
  return "Unknown";
}

std::string_view to_string(NormalizerKind kind) {
  return kind == NormalizerKind::kNfc ? "nfc" : "none";
}

std::string_view to_string(PretokenizerKind kind) {
  switch (kind) {
    case PretokenizerKind::kNone: return "none";
    case PretokenizerKind::kWhitespace: return "whitespace";
    case PretokenizerKind::kByteLevel: return "byte_level";
  }
  return "none";
}

std::string_view to_string(ByteFallbackMode mode) {
  switch (mode) {
    case ByteFallbackMode::kNone: return "none";
    case ByteFallbackMode::kMapped: return "mapped";
    case ByteFallbackMode::kHex: return "hex";
  }
  return "none";
}

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kBpe ? "bpe" : "wordpiece_freq";
}

std::optional<NormalizerKind> parse_normalizer(std::string_view name) {
  if (name == "none") return NormalizerKind::kNone;
  if (name == "nfc") return NormalizerKind::kNfc;
  return std::nullopt;
}

std::optional<PretokenizerKind> parse_pretokenizer(std::string_view name) {
  if (name == "none") return PretokenizerKind::kNone;
  if (name == "whitespace") return PretokenizerKind::kWhitespace;
  if (name == "byte_level") return PretokenizerKind::kByteLevel;
  return std::nullopt;
}

std::optional<ByteFallbackMode> parse_fallback(std::string_view name) {
  if (name == "none") return ByteFallbackMode::kNone;
  if (name == "mapped") return ByteFallbackMode::kMapped;
  if (name == "hex") return ByteFallbackMode::kHex;
  return std::nullopt;
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "bpe") return Algorithm::kBpe;
  if (name == "wordpiece_freq") return Algorithm::kWordpieceFreq;
  return std::nullopt;
}

namespace utf8 {

std::size_t sequence_length(std::string_view s, std::size_t pos) {
  const auto at = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const std::size_t n = s.size();
  if (pos >= n) return 0;
  const unsigned char b0 = at(pos);
  if (b0 < 0x80) return 1;
  const auto cont = [&](std::size_t i) {
    return i < n && (at(i) & 0xC0) == 0x80;
  };
  if (b0 >= 0xC2 && b0 <= 0xDF) return cont(pos + 1) ? 2 : 0;
  if (b0 >= 0xE0 && b0 <= 0xEF) {
    if (pos + 1 >= n) return 0;
    const unsigned char b1 = at(pos + 1);
    // Reject overlongs (E0 80..9F) and surrogates (ED A0..BF).
    if (b0 == 0xE0 && b1 < 0xA0) return 0;
    if (b0 == 0xED && b1 > 0x9F) return 0;
    return cont(pos + 1) && cont(pos + 2) ? 3 : 0;
  }
  if (b0 >= 0xF0 && b0 <= 0xF4) {
    if (pos + 1 >= n) return 0;
    const unsigned char b1 = at(pos + 1);
    if (b0 == 0xF0 && b1 < 0x90) return 0;
    if (b0 == 0xF4 && b1 > 0x8F) return 0;
    return cont(pos + 1) && cont(pos + 2) && cont(pos + 3) ? 4 : 0;
  }
  return 0;
}

std::optional<std::size_t> find_invalid(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = sequence_length(bytes, i);
    if (len == 0) return i;
    i += len;
  }
  return std::nullopt;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

namespace {

char32_t decode_at(std::string_view s, std::size_t pos, std::size_t len) {
  const auto b = [&](std::size_t i) {
    return static_cast<char32_t>(static_cast<unsigned char>(s[pos + i]));
  };
  switch (len) {
    case 1: return b(0);
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    case 4:
      return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) |
             ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
    default: return kReplacement;
  }
}

}  // namespace

std::vector<char32_t> decode(std::string_view bytes) {
  std::vector<char32_t> out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = sequence_length(bytes, i);
    if (len == 0) {
      out.push_back(kReplacement);
      ++i;
    } else {
      out.push_back(decode_at(bytes, i, len));
      i += len;
    }
  }
  return out;
}

std::vector<ByteSpan> codepoint_spans(std::string_view bytes) {
  std::vector<ByteSpan> out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = std::max<std::size_t>(1, sequence_length(bytes, i));
    out.push_back({i, i + len});
    i += len;
  }
  return out;
}

std::size_t count_codepoints(std::string_view bytes) {
  std::size_t count = 0;
  for (const char c : bytes) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++count;
  }
  return count;
}

bool sanitize(std::string_view bytes, std::string& out) {
  out.clear();
  out.reserve(bytes.size());
  bool valid = true;
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = sequence_length(bytes, i);
    if (len == 0) {
      append(out, kReplacement);
      valid = false;
      ++i;
    } else {
      out.append(bytes.substr(i, len));
      i += len;
    }
  }
  return valid;
}

}  // namespace utf8

std::string normalize(std::string_view text, NormalizerKind kind) {
  if (kind == NormalizerKind::kNone || text.empty()) return std::string(text);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kIoFailure,
                std::string("ICU NFC data unavailable: ") + u_errorName(status));
  }
  const icu::StringPiece piece(text.data(), static_cast<int32_t>(text.size()));
  if (nfc->isNormalizedUTF8(piece, status) && U_SUCCESS(status)) {
    return std::string(text);
  }
  status = U_ZERO_ERROR;
  std::string out;
  out.reserve(text.size());
  icu::StringByteSink<std::string> sink(&out);
  nfc->normalizeUTF8(0, piece, sink, nullptr, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kUtf8Error,
                std::string("NFC normalization failed: ") + u_errorName(status));
  }
  return out;
}

bool is_whitespace(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

namespace {

enum class CharClass { kSpace, kLetter, kNumber, kOther };

CharClass classify(char32_t cp) {
  if (is_whitespace(cp)) return CharClass::kSpace;
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  if (mask & (U_GC_L_MASK | U_GC_M_MASK)) return CharClass::kLetter;
  if (mask & U_GC_N_MASK) return CharClass::kNumber;
  return CharClass::kOther;
}

struct Unit {
  char32_t cp;
  ByteSpan span;
};

std::vector<Unit> units_of(std::string_view text) {
  std::vector<Unit> units;
  const auto spans = utf8::codepoint_spans(text);
  const auto cps = utf8::decode(text);
  units.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) units.push_back({cps[i], spans[i]});
  return units;
}

// Whitespace runs attach to the following word; a trailing run stands alone.
std::vector<ByteSpan> split_whitespace(const std::vector<Unit>& units) {
  std::vector<ByteSpan> out;
  std::size_t i = 0;
  while (i < units.size()) {
    const std::size_t start = i;
    while (i < units.size() && is_whitespace(units[i].cp)) ++i;
    while (i < units.size() && !is_whitespace(units[i].cp)) ++i;
    out.push_back({units[start].span.begin, units[i - 1].span.end});
  }
  return out;
}

// GPT-2 style: ` ?L+| ?N+| ?O+|\s+(?!\S)|\s+` with marks counted as letters.
std::vector<ByteSpan> split_byte_level(const std::vector<Unit>& units) {
  std::vector<ByteSpan> out;
  const std::size_t n = units.size();
  std::size_t i = 0;
  const auto emit = [&](std::size_t from, std::size_t to) {
    out.push_back({units[from].span.begin, units[to - 1].span.end});
  };
  while (i < n) {
    const CharClass cls = classify(units[i].cp);
    if (cls != CharClass::kSpace ||
        (units[i].cp == U' ' && i + 1 < n &&
         classify(units[i + 1].cp) != CharClass::kSpace)) {
      const std::size_t start = i;
      if (cls == CharClass::kSpace) ++i;
      const CharClass run = classify(units[i].cp);
      while (i < n && classify(units[i].cp) == run) ++i;
      emit(start, i);
      continue;
    }
    const std::size_t start = i;
    while (i < n && classify(units[i].cp) == CharClass::kSpace) ++i;
    if (i == n) {
      emit(start, i);
      break;
    }
    // Leave the last whitespace char for the next match.
    if (i - 1 > start) emit(start, i - 1);
    if (units[i - 1].cp != U' ') emit(i - 1, i);
    else i -= 1;
  }
  return out;
}

}  // namespace

std::vector<Pretoken> pretokenize(std::string_view text, PretokenizerKind kind) {
  std::vector<Pretoken> out;
  if (text.empty()) return out;
  std::vector<ByteSpan> spans;
  switch (kind) {
    case PretokenizerKind::kNone:
      spans.push_back({0, text.size()});
      break;
    case PretokenizerKind::kWhitespace:
      spans = split_whitespace(units_of(text));
      break;
    case PretokenizerKind::kByteLevel:
      spans = split_byte_level(units_of(text));
      break;
  }
  out.reserve(spans.size());
  for (const ByteSpan& s : spans) out.push_back({text.substr(s.begin, s.size()), s});
  return out;
}

namespace {

constexpr bool is_printable_byte(unsigned b) {
  return (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) ||
         (b >= 0xAE && b <= 0xFF);
}

constexpr std::array<char32_t, 256> make_display_table() {
  std::array<char32_t, 256> table{};
  char32_t next = 0x100;
  for (unsigned b = 0; b < 256; ++b) {
    table[b] = is_printable_byte(b) ? static_cast<char32_t>(b) : next++;
  }
  return table;
}

constexpr std::array<char32_t, 256> kDisplayTable = make_display_table();

const std::array<std::string, 256>& display_strings() {
  static const std::array<std::string, 256> strings = [] {
    std::array<std::string, 256> s;
    for (unsigned b = 0; b < 256; ++b) s[b] = utf8::encode(kDisplayTable[b]);
    return s;
  }();
  return strings;
}

}  // namespace

const std::array<char32_t, 256>& byte_display_table() { return kDisplayTable; }

char32_t byte_display(std::uint8_t b) { return kDisplayTable[b]; }

const std::string& byte_display_string(std::uint8_t b) { return display_strings()[b]; }

std::optional<std::uint8_t> byte_from_display(char32_t cp) {
  if (cp < 0x100) {
    if (is_printable_byte(static_cast<unsigned>(cp))) return static_cast<std::uint8_t>(cp);
    return std::nullopt;
  }
  // Remapped bytes occupy U+0100.. in ascending byte order.
  const char32_t index = cp - 0x100;
  char32_t seen = 0;
  for (unsigned b = 0; b < 256; ++b) {
    if (is_printable_byte(b)) continue;
    if (seen == index) return static_cast<std::uint8_t>(b);
    ++seen;
  }
  return std::nullopt;
}

std::string to_display(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const char c : bytes) out += byte_display_string(static_cast<std::uint8_t>(c));
  return out;
}

std::optional<std::string> from_display(std::string_view display) {
  if (!utf8::is_valid(display)) return std::nullopt;
  std::string out;
  out.reserve(display.size());
  for (const char32_t cp : utf8::decode(display)) {
    const auto b = byte_from_display(cp);
    if (!b) return std::nullopt;
    out += static_cast<char>(*b);
  }
  return out;
}

std::string byte_hex_token(std::uint8_t b) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "<0x%02X>", static_cast<unsigned>(b));
  return buf;
}

std::optional<std::uint8_t> parse_byte_hex_token(std::string_view token) {
  if (token.size() != 6 || token.substr(0, 3) != "<0x" || token[5] != '>') {
    return std::nullopt;
  }
  const auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  const int hi = nibble(token[3]);
  const int lo = nibble(token[4]);
  if (hi < 0 || lo < 0) return std::nullopt;
  return static_cast<std::uint8_t>(hi * 16 + lo);
}

}  // namespace toklab
