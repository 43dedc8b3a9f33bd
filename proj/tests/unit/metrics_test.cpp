#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "convtok/error.hpp"
#include "convtok/metrics.hpp"
#include "convtok/trainer.hpp"
#include "test_util.hpp"

namespace convtok {
namespace {

TokenizerModel train(const std::vector<std::string>& corpus, std::size_t vocab,
                     Mode mode = Mode::kByteLevel) {
  TrainConfig cfg;
  cfg.vocab_size = vocab;
  cfg.mode = mode;
  return train_bpe(corpus, cfg);
}

std::string zh_sentence(std::mt19937_64& rng) {
  static const std::vector<std::string> kWords = {"我们", "今天", "学习", "中文", "问题", "时间", "朋友",
                                                   "工作", "公司", "城市", "天气", "喜欢", "非常", "可以",
                                                   "什么", "因为", "所以", "已经", "没有", "知道"};
  std::uniform_int_distribution<std::size_t> pick(0, kWords.size() - 1);
  std::uniform_int_distribution<int> len(3, 8);
  std::string s;
  for (int clause = 0; clause < 3; ++clause) {
    for (int i = len(rng); i > 0; --i) s += kWords[pick(rng)];
    s += clause < 2 ? "，" : "。";
  }
  return s;
}

ConversationRecord conv(const std::string& id, const std::string& lang, std::string user,
                        std::string assistant) {
  ConversationRecord r;
  r.id = id;
  r.model_name = "m";
  r.language = lang;
  r.turns = {{Role::kUser, std::move(user)}, {Role::kAssistant, std::move(assistant)}};
  return r;
}

TEST(CountWords, Examples) {
  EXPECT_EQ(count_words("hello world"), 2u);
  EXPECT_EQ(count_words("   "), 0u);
  EXPECT_EQ(count_words("a\tb\nc  d"), 4u);
  EXPECT_EQ(count_words(""), 0u);
  EXPECT_EQ(count_words("  lead and trail  "), 3u);
  EXPECT_EQ(count_words("wide\xE3\x80\x80space"), 2u);  // U+3000 separates
  EXPECT_EQ(count_words("中文没有空格"), 1u);
}

TEST(Fertility, Formula) {
  EXPECT_DOUBLE_EQ((FertilityResult{15, 10}).fertility(), 1.5);
}

TEST(Fertility, WholeWordModelReachesOne) {
  auto m = train(std::vector<std::string>(5, "one two"), 300);
  ASSERT_EQ(m.encode("one two").size(), 2u);
  auto r = fertility(m, {"one two"});
  EXPECT_EQ(r.n_tokens, 2u);
  EXPECT_EQ(r.n_words, 2u);
  EXPECT_DOUBLE_EQ(r.fertility(), 1.0);
}

TEST(Fertility, NoWordsIsAnError) {
  auto m = TokenizerModel::base(Mode::kByteLevel, PretokenScheme::kCategorySplit);
  try {
    fertility(m, {"   ", "\n"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoWords);
  }
}

TEST(Fertility, MatchesBruteForceRecount) {
  std::mt19937_64 rng(44);
  std::vector<std::string> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back(testing::random_words(rng, 200));
  auto m = train(corpus, 256 + 500);
  ASSERT_EQ(m.merges().size(), 500u);
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i) texts.push_back(testing::random_words(rng, 300));

  std::uint64_t tokens = 0;
  std::uint64_t words = 0;
  for (const auto& t : texts) {
    tokens += m.encode(t).size();
    std::istringstream ss(t);
    std::string w;
    while (ss >> w) ++words;
  }
  auto r = fertility(m, texts);
  EXPECT_EQ(r.n_tokens, tokens);
  EXPECT_EQ(r.n_words, words);
}

TEST(Fertility, LowerBoundOnFuzzedText) {
  std::mt19937_64 rng(45);
  std::vector<std::string> corpus;
  for (int i = 0; i < 100; ++i) corpus.push_back(testing::random_words(rng, 300));
  for (Mode mode : {Mode::kByteLevel, Mode::kCharLevelFallback}) {
    for (auto scheme : {PretokenScheme::kCategorySplit, PretokenScheme::kWhitespaceSplit}) {
      TrainConfig cfg;
      cfg.mode = mode;
      cfg.scheme = scheme;
      cfg.vocab_size = 2000;
      cfg.min_pair_frequency = 1;
      auto m = train_bpe(corpus, cfg);
      for (int i = 0; i < 500; ++i) {
        const std::string t = i % 2 ? testing::random_utf8(rng, 40) : testing::random_words(rng, 60);
        if (count_words(t) == 0) continue;
        EXPECT_GE(fertility(m, {t}).fertility(), 1.0) << t;
      }
    }
  }
}

TEST(Reduction, Formula) {
  EXPECT_DOUBLE_EQ((ReductionResult{100, 90}).reduction_pct(), 10.0);
  EXPECT_DOUBLE_EQ((ReductionResult{100, 102}).reduction_pct(), -2.0);
  EXPECT_EQ(format_pct((ReductionResult{100, 90}).reduction_pct()), "10.0");
  EXPECT_EQ(format_pct((ReductionResult{100, 102}).reduction_pct()), "-2.0");
  EXPECT_EQ(format_pct(-0.04), "0.0");
}

TEST(Reduction, SameModelIsExactlyZero) {
  std::mt19937_64 rng(46);
  std::vector<std::string> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(testing::random_words(rng, 200));
  auto m = train(corpus, 600);
  auto copy = m;
  auto r = reduction(m, copy, corpus);
  EXPECT_EQ(r.tokens_base, r.tokens_opt);
  EXPECT_EQ(r.reduction_pct(), 0.0);
}

TEST(Reduction, EmptyTextIsAnError) {
  auto m = TokenizerModel::base(Mode::kByteLevel, PretokenScheme::kCategorySplit);
  try {
    reduction(m, m, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyText);
  }
}

TEST(Reduction, RecountIsStable) {
  std::mt19937_64 rng(47);
  std::vector<std::string> a, b;
  for (int i = 0; i < 50; ++i) a.push_back(testing::random_words(rng, 200));
  for (int i = 0; i < 50; ++i) b.push_back(testing::random_words(rng, 200));
  auto base = train(a, 700);
  auto opt = train(b, 700);
  auto first = reduction(base, opt, b);
  auto second = reduction(base, opt, b);
  EXPECT_EQ(first, second);
  std::uint64_t direct = 0;
  for (const auto& t : b) direct += opt.encode(t).size();
  EXPECT_EQ(first.tokens_opt, direct);
  EXPECT_GT(first.reduction_pct(), 0.0);  // opt was trained on b
}

class PerLanguage : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(48);
    std::vector<ConversationRecord> recs;
    for (int i = 0; i < 60; ++i) {
      recs.push_back(conv("en" + std::to_string(i), "en", testing::random_words(rng, 80),
                          testing::random_words(rng, 200)));
    }
    for (int i = 0; i < 12; ++i) {
      recs.push_back(conv("zh" + std::to_string(i), "zh", zh_sentence(rng), zh_sentence(rng)));
    }
    for (int i = 0; i < 3; ++i) {
      recs.push_back(conv("fr" + std::to_string(i), "fr", "bonjour", "salut"));
    }
    test_ = ConversationSet(recs);
    std::vector<std::string> base_corpus;
    for (int i = 0; i < 300; ++i) base_corpus.push_back(zh_sentence(rng));
    for (int i = 0; i < 20; ++i) base_corpus.push_back(testing::random_words(rng, 300));
    base_ = train(base_corpus, 256 + 600);
    std::vector<std::string> opt_corpus;
    for (int i = 0; i < 100; ++i) opt_corpus.push_back(testing::random_words(rng, 300));
    for (int i = 0; i < 3; ++i) opt_corpus.push_back(zh_sentence(rng));
    opt_ = train(opt_corpus, 256 + 600);
  }

  ConversationSet test_;
  std::optional<TokenizerModel> base_;
  std::optional<TokenizerModel> opt_;
};

TEST_F(PerLanguage, ThresholdIsStrict) {
  auto rows = per_language_reduction(*base_, *opt_, test_, 12);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].language, "en");
  EXPECT_EQ(rows[0].conversation_count, 60u);
  rows = per_language_reduction(*base_, *opt_, test_, 11);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].language, "zh");
}

TEST_F(PerLanguage, SkewedBaseWinsOnChinese) {
  auto rows = per_language_reduction(*base_, *opt_, test_, 5);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].language, "en");
  EXPECT_GT(rows[0].reduction.reduction_pct(), 0.0);
  EXPECT_EQ(rows[1].language, "zh");
  EXPECT_LT(rows[1].reduction.reduction_pct(), 0.0);
}

TEST_F(PerLanguage, SumsToGlobal) {
  auto rows = per_language_reduction(*base_, *opt_, test_, 5);
  auto global = reduction(*base_, *opt_, extract_text(test_, RoleFilter::kBoth));
  auto below = reduction(*base_, *opt_, extract_text(filter_language(test_, "fr"), RoleFilter::kBoth));
  std::uint64_t base_sum = below.tokens_base, opt_sum = below.tokens_opt;
  for (const auto& r : rows) {
    base_sum += r.reduction.tokens_base;
    opt_sum += r.reduction.tokens_opt;
  }
  EXPECT_EQ(base_sum, global.tokens_base);
  EXPECT_EQ(opt_sum, global.tokens_opt);
}

TEST_F(PerLanguage, SingleLanguageEqualsGlobal) {
  auto en = filter_language(test_, "en");
  auto rows = per_language_reduction(*base_, *opt_, en, 10);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].reduction, reduction(*base_, *opt_, extract_text(en, RoleFilter::kBoth)));
}

}  // namespace
}  // namespace convtok
