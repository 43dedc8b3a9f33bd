#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace convtok {

enum class Mode : std::uint8_t { kByteLevel, kCharLevelFallback };

enum class PretokenScheme : std::uint8_t { kCategorySplit, kWhitespaceSplit };

using TokenId = std::uint32_t;

using MergeRule = std::pair<std::string, std::string>;

const char* to_string(Mode mode);
const char* to_string(PretokenScheme scheme);
Mode parse_mode(std::string_view s);
PretokenScheme parse_scheme(std::string_view s);

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::size_t kByteAlphabetSize = 256;

// Byte <-> visible code point bijection used by byte-level models. Printable
// Latin-1 bytes map to themselves; the other 68 bytes map to U+0100..U+0143
// in increasing byte order.
const std::array<char32_t, 256>& byte_to_symbol();
std::optional<std::uint8_t> symbol_to_byte(char32_t cp);

// UTF-8 string of the mapped symbol for byte `b`.
const std::string& byte_symbol_string(std::uint8_t b);

// Name of the reserved fallback token for byte `b`: "<0x41>" etc.
std::string fallback_token(std::uint8_t b);
std::optional<std::uint8_t> parse_fallback_token(std::string_view token);

// Lossless segmentation into pieces; merges never cross piece boundaries.
// The returned views point into `text`.
std::vector<std::string_view> pretokenize(std::string_view text, PretokenScheme scheme);

// Base symbols of one piece as UTF-8 strings: mapped bytes (byte-level) or
// code points (char-level). Invalid UTF-8 bytes become lone one-byte symbols.
std::vector<std::string> base_symbols(std::string_view piece, Mode mode);

// Immutable tokenizer model: vocabulary (index = id) and ranked merge list.
class TokenizerModel {
 public:
  // Validates every structural invariant; throws Error(kIntegrityError).
  TokenizerModel(Mode mode, PretokenScheme scheme, std::vector<std::string> vocab,
                 std::vector<MergeRule> merges);

  // Base-only model: the mode's alphabet and no merges. `chars` adds
  // single-character tokens (char-level only), in the given order.
  static TokenizerModel base(Mode mode, PretokenScheme scheme,
                             const std::vector<std::string>& chars = {});

  Mode mode() const { return mode_; }
  PretokenScheme scheme() const { return scheme_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::vector<MergeRule>& merges() const { return merges_; }
  std::size_t size() const { return vocab_.size(); }

  const std::string& token(TokenId id) const { return vocab_.at(id); }
  std::optional<TokenId> find(std::string_view token) const;

  // Fallback byte carried by `id`, if it is a reserved fallback token.
  std::optional<std::uint8_t> fallback_byte(TokenId id) const;

  std::vector<TokenId> encode(std::string_view text) const;
  void encode_piece(std::string_view piece, std::vector<TokenId>& out) const;

  // throws Error(kIdOutOfRange) or Error(kInvalidByteSequence)
  std::string decode(std::span<const TokenId> ids) const;

  // Same model restricted to its first `k` merges; vocab keeps base tokens
  // and the products of those merges.
  TokenizerModel with_merge_prefix(std::size_t k) const;

  bool operator==(const TokenizerModel& other) const {
    return mode_ == other.mode_ && scheme_ == other.scheme_ && vocab_ == other.vocab_ &&
           merges_ == other.merges_;
  }

 private:
  struct MergeEntry {
    std::uint32_t rank;
    TokenId result;
  };

  static std::uint64_t pair_key(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  void apply_merges(std::vector<TokenId>& symbols) const;

  Mode mode_;
  PretokenScheme scheme_;
  std::vector<std::string> vocab_;
  std::vector<MergeRule> merges_;
  std::unordered_map<std::string, TokenId> index_;
  std::unordered_map<std::uint64_t, MergeEntry> merge_table_;
  std::array<TokenId, 256> byte_ids_{};  // base id of each byte (symbol or fallback)
  std::vector<std::int16_t> fallback_of_;  // id -> byte, -1 when not a fallback token
};

// Canonical JSON: {"version","mode","scheme","vocab","merges"} in that order,
// no insignificant whitespace.
std::string serialize_model(const TokenizerModel& model);
TokenizerModel deserialize_model(std::string_view json_text);

void save_model(const TokenizerModel& model, const std::filesystem::path& path);
TokenizerModel load_model(const std::filesystem::path& path);

// Memoizes per-piece encodings; intended for bulk counting over corpora.
// Not thread-safe; use one per thread.
class CachedEncoder {
 public:
  explicit CachedEncoder(const TokenizerModel& model) : model_(&model) {}

  std::size_t count(std::string_view text);
  std::vector<TokenId> encode(std::string_view text);

 private:
  const std::vector<TokenId>& piece_ids(std::string_view piece);

  const TokenizerModel* model_;
  std::unordered_map<std::string, std::vector<TokenId>> cache_;
};

}  // namespace convtok
