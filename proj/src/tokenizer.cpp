#include "convtok/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "convtok/error.hpp"
#include "convtok/unicode.hpp"

namespace convtok {
namespace {

using unicode::CharClass;

struct ByteTables {
  std::array<char32_t, 256> to_symbol{};
  std::array<std::string, 256> to_string;
  std::unordered_map<char32_t, std::uint8_t> from_symbol;

  ByteTables() {
    char32_t next = 256;
    for (int b = 0; b < 256; ++b) {
      const bool identity = (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) || b >= 0xAE;
      to_symbol[b] = identity ? static_cast<char32_t>(b) : next++;
      to_string[b] = unicode::encode(to_symbol[b]);
      from_symbol.emplace(to_symbol[b], static_cast<std::uint8_t>(b));
    }
  }
};

const ByteTables& byte_tables() {
  static const ByteTables tables;
  return tables;
}

struct CodeUnit {
  std::size_t offset;
  std::size_t length;
  char32_t cp;
  bool valid;
};

// Splits into code points, treating each invalid byte as its own unit.
std::vector<CodeUnit> code_units(std::string_view text) {
  std::vector<CodeUnit> units;
  units.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = unicode::sequence_length(static_cast<unsigned char>(text[i]));
    if (i + len <= text.size() && unicode::is_valid_utf8(text.substr(i, len))) {
      units.push_back({i, len, unicode::decode(text.substr(i, len)).front(), true});
    } else {
      len = 1;
      units.push_back({i, 1, 0xFFFD, false});
    }
    i += len;
  }
  return units;
}

CharClass unit_class(const CodeUnit& u) {
  return u.valid ? unicode::classify(u.cp) : CharClass::kOther;
}

using ojson = nlohmann::ordered_json;

[[noreturn]] void integrity(const std::string& what) {
  throw Error(ErrorCode::kIntegrityError, what);
}

}  // namespace

const char* to_string(Mode mode) {
  return mode == Mode::kByteLevel ? "byte_level" : "char_level_fallback";
}

const char* to_string(PretokenScheme scheme) {
  return scheme == PretokenScheme::kCategorySplit ? "category_split" : "whitespace_split";
}

Mode parse_mode(std::string_view s) {
  if (s == "byte_level") return Mode::kByteLevel;
  if (s == "char_level_fallback") return Mode::kCharLevelFallback;
  throw Error(ErrorCode::kConfigError, "unknown mode \"" + std::string(s) + "\"");
}

PretokenScheme parse_scheme(std::string_view s) {
  if (s == "category_split") return PretokenScheme::kCategorySplit;
  if (s == "whitespace_split") return PretokenScheme::kWhitespaceSplit;
  throw Error(ErrorCode::kConfigError, "unknown scheme \"" + std::string(s) + "\"");
}

const std::array<char32_t, 256>& byte_to_symbol() { return byte_tables().to_symbol; }

std::optional<std::uint8_t> symbol_to_byte(char32_t cp) {
  const auto& m = byte_tables().from_symbol;
  auto it = m.find(cp);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

const std::string& byte_symbol_string(std::uint8_t b) { return byte_tables().to_string[b]; }

std::string fallback_token(std::uint8_t b) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string s = "<0x00>";
  s[3] = kHex[b >> 4];
  s[4] = kHex[b & 0xF];
  return s;
}

std::optional<std::uint8_t> parse_fallback_token(std::string_view token) {
  if (token.size() != 6 || token.substr(0, 3) != "<0x" || token[5] != '>') return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  int hi = nibble(token[3]);
  int lo = nibble(token[4]);
  if (hi < 0 || lo < 0) return std::nullopt;
  return static_cast<std::uint8_t>(hi * 16 + lo);
}

std::vector<std::string_view> pretokenize(std::string_view text, PretokenScheme scheme) {
  std::vector<std::string_view> pieces;
  const auto units = code_units(text);
  const std::size_t n = units.size();
  auto slice = [&](std::size_t a, std::size_t b) {
    const std::size_t begin = units[a].offset;
    const std::size_t end = b < n ? units[b].offset : text.size();
    pieces.push_back(text.substr(begin, end - begin));
  };
  std::vector<CharClass> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = unit_class(units[i]);

  if (scheme == PretokenScheme::kWhitespaceSplit) {
    std::size_t i = 0;
    while (i < n) {
      const bool space = cls[i] == CharClass::kSpace;
      std::size_t j = i + 1;
      while (j < n && (cls[j] == CharClass::kSpace) == space) ++j;
      slice(i, j);
      i = j;
    }
    return pieces;
  }

  auto run_end = [&](std::size_t i) {
    std::size_t j = i + 1;
    while (j < n && cls[j] == cls[i]) ++j;
    return j;
  };
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = run_end(i);
    if (cls[i] == CharClass::kSpace && j < n &&
        (cls[j] == CharClass::kLetter || cls[j] == CharClass::kDigit) && units[j - 1].cp == U' ') {
      if (j - 1 > i) slice(i, j - 1);
      const std::size_t k = run_end(j);
      slice(j - 1, k);
      i = k;
    } else {
      slice(i, j);
      i = j;
    }
  }
  return pieces;
}

std::vector<std::string> base_symbols(std::string_view piece, Mode mode) {
  std::vector<std::string> out;
  if (mode == Mode::kByteLevel) {
    out.reserve(piece.size());
    for (char c : piece) out.push_back(byte_symbol_string(static_cast<std::uint8_t>(c)));
    return out;
  }
  for (const auto& u : code_units(piece)) out.emplace_back(piece.substr(u.offset, u.length));
  return out;
}

TokenizerModel::TokenizerModel(Mode mode, PretokenScheme scheme, std::vector<std::string> vocab,
                               std::vector<MergeRule> merges)
    : mode_(mode), scheme_(scheme), vocab_(std::move(vocab)), merges_(std::move(merges)) {
  if (vocab_.size() >= std::numeric_limits<TokenId>::max()) integrity("vocabulary too large");
  index_.reserve(vocab_.size());
  fallback_of_.assign(vocab_.size(), -1);
  for (std::size_t id = 0; id < vocab_.size(); ++id) {
    const std::string& tok = vocab_[id];
    if (tok.empty()) integrity("empty token at id " + std::to_string(id));
    if (!unicode::is_valid_utf8(tok)) integrity("token " + std::to_string(id) + " is not UTF-8");
    if (!index_.emplace(tok, static_cast<TokenId>(id)).second) {
      integrity("duplicate token \"" + tok + "\"");
    }
    if (mode_ == Mode::kByteLevel) {
      for (char32_t cp : unicode::decode(tok)) {
        if (!symbol_to_byte(cp)) integrity("token \"" + tok + "\" has an unmapped symbol");
      }
    } else if (auto b = parse_fallback_token(tok)) {
      fallback_of_[id] = *b;
    }
  }
  for (int b = 0; b < 256; ++b) {
    const std::string base = mode_ == Mode::kByteLevel
                                 ? byte_symbol_string(static_cast<std::uint8_t>(b))
                                 : fallback_token(static_cast<std::uint8_t>(b));
    auto it = index_.find(base);
    if (it == index_.end()) integrity("base token \"" + base + "\" missing from vocabulary");
    byte_ids_[b] = it->second;
  }
  merge_table_.reserve(merges_.size());
  for (std::size_t rank = 0; rank < merges_.size(); ++rank) {
    const auto& [left, right] = merges_[rank];
    auto l = index_.find(left);
    auto r = index_.find(right);
    auto p = index_.find(left + right);
    if (l == index_.end() || r == index_.end() || p == index_.end()) {
      integrity("merge " + std::to_string(rank) + " (\"" + left + "\", \"" + right +
                "\") refers to tokens missing from the vocabulary");
    }
    if (fallback_of_[l->second] >= 0 || fallback_of_[r->second] >= 0 ||
        fallback_of_[p->second] >= 0) {
      integrity("merge " + std::to_string(rank) + " involves a fallback token");
    }
    // A repeated pair keeps its first (lowest) rank.
    merge_table_.emplace(pair_key(l->second, r->second),
                         MergeEntry{static_cast<std::uint32_t>(rank), p->second});
  }
}

TokenizerModel TokenizerModel::base(Mode mode, PretokenScheme scheme,
                                    const std::vector<std::string>& chars) {
  std::vector<std::string> vocab;
  vocab.reserve(256 + chars.size());
  for (int b = 0; b < 256; ++b) {
    vocab.push_back(mode == Mode::kByteLevel ? byte_symbol_string(static_cast<std::uint8_t>(b))
                                             : fallback_token(static_cast<std::uint8_t>(b)));
  }
  if (mode == Mode::kCharLevelFallback) vocab.insert(vocab.end(), chars.begin(), chars.end());
  return TokenizerModel(mode, scheme, std::move(vocab), {});
}

std::optional<TokenId> TokenizerModel::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint8_t> TokenizerModel::fallback_byte(TokenId id) const {
  if (id >= fallback_of_.size() || fallback_of_[id] < 0) return std::nullopt;
  return static_cast<std::uint8_t>(fallback_of_[id]);
}

void TokenizerModel::apply_merges(std::vector<TokenId>& symbols) const {
  if (merge_table_.empty()) return;
  while (symbols.size() > 1) {
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    std::uint64_t best_key = 0;
    TokenId best_result = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_table_.find(pair_key(symbols[i], symbols[i + 1]));
      if (it != merge_table_.end() && it->second.rank < best_rank) {
        best_rank = it->second.rank;
        best_key = it->first;
        best_result = it->second.result;
      }
    }
    if (best_rank == std::numeric_limits<std::uint32_t>::max()) return;
    const auto left = static_cast<TokenId>(best_key >> 32);
    const auto right = static_cast<TokenId>(best_key & 0xFFFFFFFFu);
    std::size_t w = 0;
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        symbols[w++] = best_result;
        i += 2;
      } else {
        symbols[w++] = symbols[i++];
      }
    }
    symbols.resize(w);
  }
}

void TokenizerModel::encode_piece(std::string_view piece, std::vector<TokenId>& out) const {
  std::vector<TokenId> symbols;
  symbols.reserve(piece.size());
  if (mode_ == Mode::kByteLevel) {
    for (char c : piece) symbols.push_back(byte_ids_[static_cast<unsigned char>(c)]);
  } else {
    for (const auto& u : code_units(piece)) {
      if (u.valid) {
        auto it = index_.find(std::string(piece.substr(u.offset, u.length)));
        if (it != index_.end() && fallback_of_[it->second] < 0) {
          symbols.push_back(it->second);
          continue;
        }
      }
      for (std::size_t k = 0; k < u.length; ++k) {
        symbols.push_back(byte_ids_[static_cast<unsigned char>(piece[u.offset + k])]);
      }
    }
  }
  apply_merges(symbols);
  out.insert(out.end(), symbols.begin(), symbols.end());
}

std::vector<TokenId> TokenizerModel::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (std::string_view piece : pretokenize(text, scheme_)) encode_piece(piece, out);
  return out;
}

std::string TokenizerModel::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id >= vocab_.size()) {
      throw Error(ErrorCode::kIdOutOfRange,
                  "token id " + std::to_string(id) + " out of range for vocabulary of " +
                      std::to_string(vocab_.size()));
    }
    if (mode_ == Mode::kByteLevel) {
      for (char32_t cp : unicode::decode(vocab_[id])) out.push_back(static_cast<char>(*symbol_to_byte(cp)));
    } else if (fallback_of_[id] >= 0) {
      out.push_back(static_cast<char>(fallback_of_[id]));
    } else {
      out += vocab_[id];
    }
  }
  if (!unicode::is_valid_utf8(out)) {
    throw Error(ErrorCode::kInvalidByteSequence, "decoded bytes are not valid UTF-8");
  }
  return out;
}

TokenizerModel TokenizerModel::with_merge_prefix(std::size_t k) const {
  k = std::min(k, merges_.size());
  std::vector<bool> keep(vocab_.size(), true);
  // Products of merges beyond k are dropped unless an earlier merge (or the
  // base alphabet) also produces them.
  std::vector<bool> produced_early(vocab_.size(), false);
  for (std::size_t r = 0; r < k; ++r) {
    produced_early[index_.at(merges_[r].first + merges_[r].second)] = true;
  }
  for (std::size_t r = k; r < merges_.size(); ++r) {
    const TokenId p = index_.at(merges_[r].first + merges_[r].second);
    if (!produced_early[p]) keep[p] = false;
  }
  std::vector<std::string> vocab;
  for (std::size_t id = 0; id < vocab_.size(); ++id) {
    if (keep[id]) vocab.push_back(vocab_[id]);
  }
  return TokenizerModel(mode_, scheme_, std::move(vocab),
                        std::vector<MergeRule>(merges_.begin(), merges_.begin() + static_cast<std::ptrdiff_t>(k)));
}

std::string serialize_model(const TokenizerModel& model) {
  ojson j;
  j["version"] = kModelFormatVersion;
  j["mode"] = to_string(model.mode());
  j["scheme"] = to_string(model.scheme());
  j["vocab"] = model.vocab();
  ojson merges = ojson::array();
  for (const auto& [l, r] : model.merges()) merges.push_back(ojson::array({l, r}));
  j["merges"] = std::move(merges);
  return j.dump();
}

TokenizerModel deserialize_model(std::string_view json_text) {
  auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) integrity("model file is not a JSON object");
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    integrity("model file has no integer \"version\"");
  }
  if (j["version"].get<int>() != kModelFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                "model format version " + std::to_string(j["version"].get<int>()) +
                    " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  try {
    Mode mode = parse_mode(j.at("mode").get<std::string>());
    PretokenScheme scheme = parse_scheme(j.at("scheme").get<std::string>());
    auto vocab = j.at("vocab").get<std::vector<std::string>>();
    std::vector<MergeRule> merges;
    for (const auto& m : j.at("merges")) {
      if (!m.is_array() || m.size() != 2) integrity("merge entry is not a pair");
      merges.emplace_back(m[0].get<std::string>(), m[1].get<std::string>());
    }
    return TokenizerModel(mode, scheme, std::move(vocab), std::move(merges));
  } catch (const nlohmann::json::exception& e) {
    integrity(std::string("model file structure: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError) integrity(e.what());
    throw;
  }
}

void save_model(const TokenizerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

TokenizerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

const std::vector<TokenId>& CachedEncoder::piece_ids(std::string_view piece) {
  auto it = cache_.find(std::string(piece));
  if (it != cache_.end()) return it->second;
  std::vector<TokenId> ids;
  model_->encode_piece(piece, ids);
  return cache_.emplace(std::string(piece), std::move(ids)).first->second;
}

std::size_t CachedEncoder::count(std::string_view text) {
  std::size_t n = 0;
  for (std::string_view piece : pretokenize(text, model_->scheme())) n += piece_ids(piece).size();
  return n;
}

std::vector<TokenId> CachedEncoder::encode(std::string_view text) {
  std::vector<TokenId> out;
  for (std::string_view piece : pretokenize(text, model_->scheme())) {
    const auto& ids = piece_ids(piece);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

}  // namespace convtok
