#pragma once

// Fundamental types shared by every module: enums describing a tokenizer's
// pipeline, UTF-8 helpers, normalization, pretokenization and the two byte
// renderings (display alphabet and <0xHH> tokens).

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toklab {

using TokenId = std::uint32_t;

enum class NormalizerKind { kNone, kNfc };
enum class PretokenizerKind { kNone, kWhitespace, kByteLevel };
enum class ByteFallbackMode { kNone, kMapped, kHex };
enum class Algorithm { kBpe, kWordpieceFreq };

std::string_view to_string(NormalizerKind kind);
std::string_view to_string(PretokenizerKind kind);
std::string_view to_string(ByteFallbackMode mode);
std::string_view to_string(Algorithm algorithm);

// Parsers accept exactly the names produced by to_string.
std::optional<NormalizerKind> parse_normalizer(std::string_view name);
std::optional<PretokenizerKind> parse_pretokenizer(std::string_view name);
std::optional<ByteFallbackMode> parse_fallback(std::string_view name);
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Half-open byte range [begin, end) into a UTF-8 string.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Offset of the first byte that does not start a well-formed sequence, or
// nullopt when the whole input is valid UTF-8.
std::optional<std::size_t> find_invalid(std::string_view bytes);
inline bool is_valid(std::string_view bytes) { return !find_invalid(bytes); }

// Length of the well-formed sequence starting at `pos` (1-4), or 0.
std::size_t sequence_length(std::string_view bytes, std::size_t pos);

void append(std::string& out, char32_t cp);
std::string encode(char32_t cp);

// Decodes valid UTF-8. Ill-formed sequences decode to U+FFFD.
std::vector<char32_t> decode(std::string_view bytes);

// Byte spans of each codepoint in valid UTF-8 text.
std::vector<ByteSpan> codepoint_spans(std::string_view bytes);

std::size_t count_codepoints(std::string_view bytes);

// Replaces ill-formed sequences with U+FFFD. Returns true when the input
// was already valid.
bool sanitize(std::string_view bytes, std::string& out);

}  // namespace utf8

std::string normalize(std::string_view text, NormalizerKind kind);

struct Pretoken {
  std::string_view text;  // view into the pretokenized input
  ByteSpan span;
};

// Splits normalized text into pretokens whose spans tile the input exactly.
// The returned views alias `text`.
std::vector<Pretoken> pretokenize(std::string_view text, PretokenizerKind kind);

bool is_whitespace(char32_t cp);

// Byte -> printable codepoint table. Printable Latin-1 bytes map to
// themselves; the rest are assigned U+0100 onward in ascending byte order.
const std::array<char32_t, 256>& byte_display_table();
char32_t byte_display(std::uint8_t b);
// UTF-8 encoding of byte_display(b).
const std::string& byte_display_string(std::uint8_t b);
std::optional<std::uint8_t> byte_from_display(char32_t cp);

// Maps raw bytes onto the display alphabet, one display char per byte.
std::string to_display(std::string_view bytes);
// Inverse of to_display; nullopt when a character is not in the alphabet.
std::optional<std::string> from_display(std::string_view display);

// "<0xHH>", uppercase and zero padded.
std::string byte_hex_token(std::uint8_t b);
std::optional<std::uint8_t> parse_byte_hex_token(std::string_view token);

}  // namespace toklab
