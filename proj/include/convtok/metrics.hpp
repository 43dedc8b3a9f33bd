#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "convtok/corpus.hpp"
#include "convtok/tokenizer.hpp"

namespace convtok {

struct FertilityResult {
  std::uint64_t n_tokens = 0;
  std::uint64_t n_words = 0;

  double fertility() const {
    return static_cast<double>(n_tokens) / static_cast<double>(n_words);
  }
  bool operator==(const FertilityResult&) const = default;
};

// 100 * (1 - tokens_opt / tokens_base); negative means the optimized model
// needs more tokens.
struct ReductionResult {
  std::uint64_t tokens_base = 0;
  std::uint64_t tokens_opt = 0;

  double reduction_pct() const {
    return 100.0 * (1.0 - static_cast<double>(tokens_opt) / static_cast<double>(tokens_base));
  }
  bool operator==(const ReductionResult&) const = default;
};

struct LanguageRow {
  std::string language;
  std::size_t conversation_count = 0;
  ReductionResult reduction;
  std::uint64_t n_words = 0;
};

// Maximal runs of non-whitespace code points (Unicode White_Space).
std::size_t count_words(std::string_view text);

std::uint64_t count_tokens(const TokenizerModel& model, const std::vector<std::string>& texts);
std::uint64_t count_words(const std::vector<std::string>& texts);

// throws Error(kNoWords) when the texts hold no words.
FertilityResult fertility(const TokenizerModel& model, const std::vector<std::string>& texts);

// throws Error(kEmptyText) when the base model produces no tokens.
ReductionResult reduction(const TokenizerModel& base, const TokenizerModel& opt,
                          const std::vector<std::string>& texts);

inline constexpr std::size_t kDefaultLanguageThreshold = 1000;

// One row per language with strictly more than `threshold` conversations,
// ordered by count desc then tag asc; both roles counted.
std::vector<LanguageRow> per_language_reduction(const TokenizerModel& base,
                                                const TokenizerModel& opt,
                                                const ConversationSet& test,
                                                std::size_t threshold = kDefaultLanguageThreshold);

// Fixed one-decimal rendering used in every report ("-2.0", "10.0").
std::string format_pct(double pct);
std::string format_ratio(double value);

}  // namespace convtok
