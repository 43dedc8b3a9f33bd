#include <gtest/gtest.h>

#include <limits>
#include <map>
#include <random>
#include <set>

#include "convtok/error.hpp"
#include "convtok/tokenizer.hpp"
#include "convtok/trainer.hpp"
#include "test_util.hpp"

namespace convtok {
namespace {

using Pieces = std::vector<std::string_view>;

// Byte map built the slow way: walk all byte values and hand out code points
// from 256 upwards to every byte outside the printable Latin-1 ranges.
std::map<int, char32_t> enumerate_byte_map() {
  std::map<int, char32_t> m;
  char32_t next = 256;
  for (int b = 0; b < 256; ++b) {
    bool printable = false;
    for (auto [lo, hi] : {std::pair{0x21, 0x7E}, std::pair{0xA1, 0xAC}, std::pair{0xAE, 0xFF}}) {
      printable = printable || (b >= lo && b <= hi);
    }
    m[b] = printable ? static_cast<char32_t>(b) : next++;
  }
  return m;
}

// Independent encoder: strings only, rescans for the lowest-rank pair.
std::vector<std::string> naive_encode(const TokenizerModel& m, std::string_view text) {
  std::vector<std::string> out;
  for (auto piece : pretokenize(text, m.scheme())) {
    std::vector<std::string> syms;
    for (auto& s : base_symbols(piece, m.mode())) {
      if (m.mode() == Mode::kCharLevelFallback && !m.find(s)) {
        for (unsigned char c : s) syms.push_back(fallback_token(c));
      } else {
        syms.push_back(s);
      }
    }
    while (true) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        for (std::size_t r = 0; r < m.merges().size() && r < best; ++r) {
          if (m.merges()[r].first == syms[i] && m.merges()[r].second == syms[i + 1]) best = r;
        }
      }
      if (best == std::numeric_limits<std::size_t>::max()) break;
      const auto& [l, r] = m.merges()[best];
      std::vector<std::string> next;
      for (std::size_t i = 0; i < syms.size();) {
        if (i + 1 < syms.size() && syms[i] == l && syms[i + 1] == r) {
          next.push_back(l + r);
          i += 2;
        } else {
          next.push_back(syms[i++]);
        }
      }
      syms = std::move(next);
    }
    out.insert(out.end(), syms.begin(), syms.end());
  }
  return out;
}

TokenizerModel ab_model() {
  auto vocab = TokenizerModel::base(Mode::kByteLevel, PretokenScheme::kCategorySplit).vocab();
  vocab.push_back("ab");
  return TokenizerModel(Mode::kByteLevel, PretokenScheme::kCategorySplit, vocab, {{"a", "b"}});
}

TokenizerModel trained(Mode mode, std::uint64_t seed, std::size_t merges = 300) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> corpus;
  for (int i = 0; i < 40; ++i) corpus.push_back(testing::random_words(rng, 400));
  for (int i = 0; i < 20; ++i) corpus.push_back(testing::random_utf8(rng, 60));
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.vocab_size = 256 + merges + (mode == Mode::kCharLevelFallback ? 2000 : 0);
  return train_bpe(corpus, cfg);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::kIoError;
}

TEST(ByteSymbolMap, MatchesEnumeration) {
  const auto expected = enumerate_byte_map();
  const auto& map = byte_to_symbol();
  for (int b = 0; b < 256; ++b) EXPECT_EQ(map[b], expected.at(b)) << b;
  EXPECT_EQ(map[0x41], U'A');
  EXPECT_EQ(map[0x20], char32_t{288});
  EXPECT_EQ(map[0xAD], char32_t{323});
  std::set<char32_t> distinct(map.begin(), map.end());
  EXPECT_EQ(distinct.size(), 256u);
  for (int b = 0; b < 256; ++b) EXPECT_EQ(symbol_to_byte(map[b]), b);
  EXPECT_FALSE(symbol_to_byte(U' ').has_value());
}

TEST(FallbackToken, Names) {
  EXPECT_EQ(fallback_token(0x00), "<0x00>");
  EXPECT_EQ(fallback_token(0xC3), "<0xC3>");
  EXPECT_EQ(parse_fallback_token("<0xA9>"), 0xA9);
  EXPECT_FALSE(parse_fallback_token("<0xa9>"));
  EXPECT_FALSE(parse_fallback_token("<0xA9"));
}

TEST(Pretokenize, CategorySplitExamples) {
  EXPECT_EQ(pretokenize("hello world", PretokenScheme::kCategorySplit), (Pieces{"hello", " world"}));
  EXPECT_TRUE(pretokenize("", PretokenScheme::kCategorySplit).empty());
  EXPECT_EQ(pretokenize("ab12, cd", PretokenScheme::kCategorySplit), (Pieces{"ab", "12", ",", " cd"}));
  EXPECT_EQ(pretokenize("  hello", PretokenScheme::kCategorySplit), (Pieces{" ", " hello"}));
  EXPECT_EQ(pretokenize("x  (y", PretokenScheme::kCategorySplit), (Pieces{"x", "  ", "(", "y"}));
  EXPECT_EQ(pretokenize("a\n b", PretokenScheme::kCategorySplit), (Pieces{"a", "\n", " b"}));
  EXPECT_EQ(pretokenize("a\tb", PretokenScheme::kCategorySplit), (Pieces{"a", "\t", "b"}));
  EXPECT_EQ(pretokenize("v1.2 !!", PretokenScheme::kCategorySplit), (Pieces{"v", "1", ".", "2", " ", "!!"}));
  EXPECT_EQ(pretokenize("我爱 東京", PretokenScheme::kCategorySplit), (Pieces{"我爱", " 東京"}));
  EXPECT_EQ(pretokenize("x 42", PretokenScheme::kCategorySplit), (Pieces{"x", " 42"}));
}

TEST(Pretokenize, WhitespaceSplitExamples) {
  EXPECT_EQ(pretokenize("hello  world!", PretokenScheme::kWhitespaceSplit),
            (Pieces{"hello", "  ", "world!"}));
  EXPECT_EQ(pretokenize(" a", PretokenScheme::kWhitespaceSplit), (Pieces{" ", "a"}));
  EXPECT_TRUE(pretokenize("", PretokenScheme::kWhitespaceSplit).empty());
}

TEST(Pretokenize, LosslessOnFuzzedText) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    const std::string s = testing::random_utf8(rng, 50);
    for (auto scheme : {PretokenScheme::kCategorySplit, PretokenScheme::kWhitespaceSplit}) {
      std::string joined;
      for (auto p : pretokenize(s, scheme)) {
        EXPECT_FALSE(p.empty());
        joined += p;
      }
      ASSERT_EQ(joined, s);
    }
  }
}

TEST(Pretokenize, AtMostOneWordPerPiece) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const std::string s = testing::random_utf8(rng, 50);
    for (auto scheme : {PretokenScheme::kCategorySplit, PretokenScheme::kWhitespaceSplit}) {
      for (auto p : pretokenize(s, scheme)) {
        // Strip one leading space; the rest must be all-space or space-free.
        std::string_view body = p.size() > 1 && p[0] == ' ' ? p.substr(1) : p;
        auto cps = unicode::decode(body);
        const bool any_space = std::any_of(cps.begin(), cps.end(), unicode::is_whitespace);
        const bool all_space = std::all_of(cps.begin(), cps.end(), unicode::is_whitespace);
        EXPECT_TRUE(!any_space || all_space) << p;
      }
    }
  }
}

TEST(Encode, EmptyText) {
  EXPECT_TRUE(ab_model().encode("").empty());
}

TEST(Encode, SingleMerge) {
  auto m = ab_model();
  const TokenId ab = *m.find("ab");
  EXPECT_EQ(m.encode("abab"), (std::vector<TokenId>{ab, ab}));
  EXPECT_EQ(m.decode(m.encode("abab")), "abab");
  auto naive = naive_encode(m, "abab");
  EXPECT_EQ(naive, (std::vector<std::string>{"ab", "ab"}));
}

TEST(Encode, CharFallbackForUnseenCharacter) {
  TrainConfig cfg;
  cfg.mode = Mode::kCharLevelFallback;
  cfg.vocab_size = 400;
  auto m = train_bpe({"plain ascii text only", "more ascii"}, cfg);
  ASSERT_FALSE(m.find("é"));
  auto ids = m.encode("é");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(m.token(ids[0]), "<0xC3>");
  EXPECT_EQ(m.token(ids[1]), "<0xA9>");
  EXPECT_EQ(m.decode(ids), "é");
}

TEST(Encode, MatchesNaiveEncoder) {
  for (Mode mode : {Mode::kByteLevel, Mode::kCharLevelFallback}) {
    auto m = trained(mode, 5);
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
      const std::string s = i % 2 ? testing::random_words(rng, 80) : testing::random_utf8(rng, 30);
      std::vector<std::string> got;
      for (TokenId id : m.encode(s)) got.push_back(m.token(id));
      ASSERT_EQ(got, naive_encode(m, s)) << s;
    }
  }
}

TEST(Encode, NoTokenSpansPieces) {
  for (Mode mode : {Mode::kByteLevel, Mode::kCharLevelFallback}) {
    auto m = trained(mode, 6);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      const std::string s = testing::random_words(rng, 120);
      std::vector<TokenId> piecewise;
      for (auto p : pretokenize(s, m.scheme())) {
        auto ids = m.encode(std::string(p));
        EXPECT_EQ(m.decode(ids), p);
        piecewise.insert(piecewise.end(), ids.begin(), ids.end());
      }
      EXPECT_EQ(piecewise, m.encode(s));
    }
  }
}

TEST(Encode, NeverLongerThanBaseSymbols) {
  auto m = trained(Mode::kByteLevel, 8);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const std::string s = testing::random_utf8(rng, 40);
    EXPECT_LE(m.encode(s).size(), s.size());
  }
}

TEST(Decode, RoundTripBothModes) {
  for (Mode mode : {Mode::kByteLevel, Mode::kCharLevelFallback}) {
    auto m = trained(mode, 21);
    EXPECT_EQ(m.decode(m.encode("hello")), "hello");
    EXPECT_EQ(m.decode(std::vector<TokenId>{}), "");
    std::mt19937_64 rng(21);
    for (int i = 0; i < 2000; ++i) {
      const std::string s = testing::random_utf8(rng, 40);
      ASSERT_EQ(m.decode(m.encode(s)), s);
    }
  }
}

TEST(Decode, Errors) {
  auto m = ab_model();
  EXPECT_EQ(code_of([&] { m.decode(std::vector<TokenId>{static_cast<TokenId>(m.size())}); }),
            ErrorCode::kIdOutOfRange);
  EXPECT_EQ(code_of([&] { m.decode(std::vector<TokenId>{*m.find(byte_symbol_string(0xC3))}); }),
            ErrorCode::kInvalidByteSequence);
  auto c = TokenizerModel::base(Mode::kCharLevelFallback, PretokenScheme::kCategorySplit, {"a"});
  EXPECT_EQ(code_of([&] { c.decode(std::vector<TokenId>{0xC3}); }), ErrorCode::kInvalidByteSequence);
  EXPECT_EQ(c.decode(std::vector<TokenId>{0xC3, 0xA9, 256}), "éa");
}

TEST(Model, ValidationRejectsBrokenModels) {
  auto vocab = TokenizerModel::base(Mode::kByteLevel, PretokenScheme::kCategorySplit).vocab();
  auto dup = vocab;
  dup.push_back("a");
  EXPECT_EQ(code_of([&] { TokenizerModel(Mode::kByteLevel, PretokenScheme::kCategorySplit, dup, {}); }),
            ErrorCode::kIntegrityError);
  auto missing = vocab;
  missing.erase(missing.begin() + 'a');
  EXPECT_EQ(code_of([&] { TokenizerModel(Mode::kByteLevel, PretokenScheme::kCategorySplit, missing, {}); }),
            ErrorCode::kIntegrityError);
  EXPECT_EQ(code_of([&] {
              TokenizerModel(Mode::kByteLevel, PretokenScheme::kCategorySplit, vocab, {{"a", "b"}});
            }),
            ErrorCode::kIntegrityError);
  auto spaced = vocab;
  spaced.push_back("a b");  // raw space is not a mapped byte symbol
  EXPECT_EQ(code_of([&] { TokenizerModel(Mode::kByteLevel, PretokenScheme::kCategorySplit, spaced, {}); }),
            ErrorCode::kIntegrityError);
}

TEST(Model, MergePrefix) {
  auto m = trained(Mode::kByteLevel, 2, 50);
  ASSERT_GE(m.merges().size(), 20u);
  auto p = m.with_merge_prefix(20);
  EXPECT_EQ(p.merges().size(), 20u);
  EXPECT_EQ(p.size(), 256u + 20u);
  EXPECT_EQ(m.with_merge_prefix(m.merges().size()), m);
  EXPECT_EQ(m.with_merge_prefix(0), TokenizerModel::base(Mode::kByteLevel, m.scheme()));
}

TEST(Serialization, CanonicalShape) {
  auto json = serialize_model(ab_model());
  EXPECT_EQ(json.rfind(R"({"version":1,"mode":"byte_level","scheme":"category_split","vocab":[)", 0), 0u);
  EXPECT_NE(json.find(R"("merges":[["a","b"]]})"), std::string::npos);
  EXPECT_EQ(json.find('\n'), std::string::npos);
}

TEST(Serialization, SaveLoadRoundTrip) {
  testing::TempDir dir("model_io");
  for (Mode mode : {Mode::kByteLevel, Mode::kCharLevelFallback}) {
    auto m = trained(mode, 31, 44);
    auto p = dir.path() / "m.json";
    save_model(m, p);
    auto back = load_model(p);
    EXPECT_EQ(back, m);
    EXPECT_EQ(serialize_model(back), serialize_model(m));
  }
}

TEST(Serialization, TamperedFiles) {
  auto json = serialize_model(ab_model());
  auto dangling = json;
  dangling.replace(dangling.find(R"(["a","b"])"), 9, R"(["a","c"])");
  EXPECT_EQ(code_of([&] { deserialize_model(dangling); }), ErrorCode::kIntegrityError);
  auto version = json;
  version.replace(version.find(R"("version":1)"), 11, R"("version":2)");
  EXPECT_EQ(code_of([&] { deserialize_model(version); }), ErrorCode::kFormatVersionMismatch);
  EXPECT_EQ(code_of([&] { deserialize_model("[]"); }), ErrorCode::kIntegrityError);
  auto mode = json;
  mode.replace(mode.find("byte_level"), 10, "wordpiece!");
  EXPECT_EQ(code_of([&] { deserialize_model(mode); }), ErrorCode::kIntegrityError);
}

TEST(CachedEncoder, AgreesWithEncode) {
  auto m = trained(Mode::kByteLevel, 17);
  CachedEncoder enc(m);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const std::string s = testing::random_words(rng, 100);
    EXPECT_EQ(enc.encode(s), m.encode(s));
    EXPECT_EQ(enc.count(s), m.encode(s).size());
  }
}

}  // namespace
}  // namespace convtok
