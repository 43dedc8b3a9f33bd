#include "convtok/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "convtok/error.hpp"
#include "convtok/unicode.hpp"

namespace convtok {

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b = static_cast<unsigned char>(text[i]);
    std::size_t len = unicode::sequence_length(b);
    bool space;
    if (b < 0x80) {
      space = unicode::is_whitespace(b);
      len = 1;
    } else if (i + len <= text.size() && unicode::is_valid_utf8(text.substr(i, len))) {
      space = unicode::is_whitespace(unicode::decode(text.substr(i, len)).front());
    } else {
      space = false;
      len = 1;
    }
    if (!space && !in_word) ++words;
    in_word = !space;
    i += len;
  }
  return words;
}

std::uint64_t count_tokens(const TokenizerModel& model, const std::vector<std::string>& texts) {
  CachedEncoder encoder(model);
  std::uint64_t n = 0;
  for (const auto& t : texts) n += encoder.count(t);
  return n;
}

std::uint64_t count_words(const std::vector<std::string>& texts) {
  std::uint64_t n = 0;
  for (const auto& t : texts) n += count_words(std::string_view(t));
  return n;
}

FertilityResult fertility(const TokenizerModel& model, const std::vector<std::string>& texts) {
  FertilityResult r;
  r.n_words = count_words(texts);
  if (r.n_words == 0) throw Error(ErrorCode::kNoWords, "fertility is undefined on text without words");
  r.n_tokens = count_tokens(model, texts);
  return r;
}

ReductionResult reduction(const TokenizerModel& base, const TokenizerModel& opt,
                          const std::vector<std::string>& texts) {
  ReductionResult r;
  r.tokens_base = count_tokens(base, texts);
  if (r.tokens_base == 0) throw Error(ErrorCode::kEmptyText, "reduction needs non-empty text");
  r.tokens_opt = count_tokens(opt, texts);
  return r;
}

std::vector<LanguageRow> per_language_reduction(const TokenizerModel& base,
                                                const TokenizerModel& opt,
                                                const ConversationSet& test,
                                                std::size_t threshold) {
  std::vector<LanguageRow> rows;
  for (const auto& [lang, count] : language_histogram(test)) {
    if (count <= threshold) continue;
    auto texts = extract_text(filter_language(test, lang), RoleFilter::kBoth);
    LanguageRow row;
    row.language = lang;
    row.conversation_count = count;
    row.reduction = reduction(base, opt, texts);
    row.n_words = count_words(texts);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const LanguageRow& a, const LanguageRow& b) {
    return a.conversation_count > b.conversation_count;
  });
  return rows;
}

std::string format_pct(double pct) {
  char buf[32];
  double r = std::round(pct * 10.0) / 10.0;
  if (r == 0.0) r = 0.0;  // no "-0.0"
  std::snprintf(buf, sizeof buf, "%.1f", r);
  return buf;
}

std::string format_ratio(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

}  // namespace convtok
