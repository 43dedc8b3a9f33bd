#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "convtok/tokenizer.hpp"

namespace convtok {

struct TrainConfig {
  std::size_t vocab_size = 8192;
  Mode mode = Mode::kByteLevel;
  PretokenScheme scheme = PretokenScheme::kCategorySplit;
  std::uint64_t min_pair_frequency = 2;
  // Worker threads for piece counting; 0 picks hardware concurrency. Never
  // changes the result.
  unsigned threads = 0;
};

struct PairCount {
  std::string left;
  std::string right;
  std::uint64_t frequency = 0;

  bool operator==(const PairCount&) const = default;
};

// A symbol sequence with its multiplicity in the corpus.
struct WeightedSequence {
  std::vector<std::string> symbols;
  std::uint64_t count = 1;
};

// Every adjacent index pair counts ("aaa" gives (a,a):2), weighted by the
// sequence multiplicity. Sorted by frequency desc, then (left, right) asc.
std::vector<PairCount> count_pairs(const std::vector<WeightedSequence>& sequences);

struct TrainOutput {
  TokenizerModel model;
  // Pair frequency at the moment each merge was selected, in merge order.
  std::vector<std::uint64_t> merge_frequencies;
};

// Greedy BPE: repeatedly merge the most frequent adjacent pair (ties go to the
// lexicographically smallest (left, right) by code point) until the vocabulary
// reaches `vocab_size` or the best frequency drops below min_pair_frequency.
// throws Error(kConfigError) when vocab_size is below the base alphabet.
TokenizerModel train_bpe(const std::vector<std::string>& corpus, const TrainConfig& config);
TrainOutput train_bpe_detailed(const std::vector<std::string>& corpus, const TrainConfig& config);

inline constexpr std::size_t kOracleCorpusLimit = std::size_t{1} << 20;

// Reference trainer: full recount after every merge. Output is identical to
// train_bpe. throws Error(kCorpusTooLarge) past `limit` bytes.
TokenizerModel train_bpe_oracle(const std::vector<std::string>& corpus, const TrainConfig& config,
                                std::size_t limit = kOracleCorpusLimit);
TrainOutput train_bpe_oracle_detailed(const std::vector<std::string>& corpus,
                                      const TrainConfig& config,
                                      std::size_t limit = kOracleCorpusLimit);

// Retrains from scratch with the reference's mode, scheme and vocabulary size.
TokenizerModel retrain_like(const TokenizerModel& reference, const std::vector<std::string>& corpus,
                            std::uint64_t min_pair_frequency = 2, unsigned threads = 0);

}  // namespace convtok
