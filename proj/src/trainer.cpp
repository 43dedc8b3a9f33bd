#include "convtok/trainer.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <queue>
#include <set>
#include <thread>
#include <unordered_map>

#include "convtok/error.hpp"

namespace convtok {
namespace {

using PieceCounts = std::unordered_map<std::string, std::uint64_t>;

// Pretokenizes the corpus in contiguous chunks, one per worker, then folds
// the per-chunk maps in chunk order.
PieceCounts count_pieces(const std::vector<std::string>& corpus, PretokenScheme scheme,
                         unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(corpus.size(), 1)));
  std::vector<PieceCounts> partial(threads);
  auto work = [&](unsigned t) {
    const std::size_t begin = corpus.size() * t / threads;
    const std::size_t end = corpus.size() * (t + 1) / threads;
    for (std::size_t i = begin; i < end; ++i) {
      for (std::string_view piece : pretokenize(corpus[i], scheme)) ++partial[t][std::string(piece)];
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  PieceCounts total = std::move(partial[0]);
  for (unsigned t = 1; t < threads; ++t) {
    for (auto& [piece, n] : partial[t]) total[piece] += n;
  }
  return total;
}

void check_base_size(const TrainConfig& config, std::size_t base_size) {
  if (config.vocab_size < base_size) {
    throw Error(ErrorCode::kConfigError,
                "vocab_size " + std::to_string(config.vocab_size) + " is below the base alphabet size " +
                    std::to_string(base_size) + " for mode " + to_string(config.mode));
  }
}

// A pair whose product would collide with a reserved fallback token name.
bool forbidden_product(Mode mode, const std::string& left, const std::string& right) {
  return mode == Mode::kCharLevelFallback && left.size() + right.size() == 6 &&
         parse_fallback_token(left + right).has_value();
}

struct Word {
  std::vector<TokenId> symbols;
  std::uint64_t count;
};

std::uint64_t key_of(TokenId a, TokenId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

class FastTrainer {
 public:
  FastTrainer(const std::vector<std::string>& corpus, const TrainConfig& config) : config_(config) {
    if (config.min_pair_frequency == 0) {
      throw Error(ErrorCode::kConfigError, "min_pair_frequency must be positive");
    }
    check_base_size(config, kByteAlphabetSize);
    PieceCounts pieces = count_pieces(corpus, config.scheme, config.threads);
    std::vector<std::pair<std::string, std::uint64_t>> sorted(pieces.begin(), pieces.end());
    std::sort(sorted.begin(), sorted.end());

    std::vector<std::string> chars;
    if (config.mode == Mode::kCharLevelFallback) {
      std::set<std::string> distinct;
      for (const auto& [piece, n] : sorted) {
        for (auto& s : base_symbols(piece, config.mode)) {
          if (s.size() > 1 || static_cast<unsigned char>(s[0]) < 0x80) distinct.insert(std::move(s));
        }
      }
      chars.assign(distinct.begin(), distinct.end());
    }
    TokenizerModel base = TokenizerModel::base(config.mode, config.scheme, chars);
    check_base_size(config, base.size());
    vocab_ = base.vocab();
    for (std::size_t id = 0; id < vocab_.size(); ++id) index_.emplace(vocab_[id], static_cast<TokenId>(id));
    unmergeable_.assign(vocab_.size(), config.mode == Mode::kCharLevelFallback);
    if (config.mode == Mode::kCharLevelFallback) {
      for (std::size_t id = kByteAlphabetSize; id < vocab_.size(); ++id) unmergeable_[id] = false;
    }

    words_.reserve(sorted.size());
    for (const auto& [piece, n] : sorted) {
      Word w{{}, n};
      std::vector<TokenId> tmp;
      base.encode_piece(piece, tmp);
      w.symbols = std::move(tmp);
      words_.push_back(std::move(w));
    }
  }

  TrainOutput run() {
    for (std::uint32_t wi = 0; wi < words_.size(); ++wi) {
      const Word& w = words_[wi];
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
        if (!countable(w.symbols[i], w.symbols[i + 1])) continue;
        const auto k = key_of(w.symbols[i], w.symbols[i + 1]);
        counts_[k] += w.count;
        auto& occ = occurrences_[k];
        if (occ.empty() || occ.back() != wi) occ.push_back(wi);
      }
    }
    for (const auto& [k, c] : counts_) heap_.push(Entry{c, k});

    std::vector<MergeRule> merges;
    std::vector<std::uint64_t> freqs;
    while (vocab_.size() < config_.vocab_size && !heap_.empty()) {
      Entry top = heap_.top();
      heap_.pop();
      auto it = counts_.find(top.key);
      const std::uint64_t current = it == counts_.end() ? 0 : it->second;
      if (current != top.count) {
        if (current > 0 && current < top.count) heap_.push(Entry{current, top.key});
        continue;
      }
      if (current < config_.min_pair_frequency) break;
      const auto left = static_cast<TokenId>(top.key >> 32);
      const auto right = static_cast<TokenId>(top.key & 0xFFFFFFFFu);
      if (forbidden_product(config_.mode, vocab_[left], vocab_[right])) continue;

      std::string product = vocab_[left] + vocab_[right];
      TokenId pid;
      if (auto f = index_.find(product); f != index_.end()) {
        pid = f->second;
      } else {
        pid = static_cast<TokenId>(vocab_.size());
        index_.emplace(product, pid);
        vocab_.push_back(std::move(product));
        unmergeable_.push_back(false);
      }
      merges.emplace_back(vocab_[left], vocab_[right]);
      freqs.push_back(current);
      apply(left, right, pid, top.key);
    }
    return {TokenizerModel(config_.mode, config_.scheme, vocab_, std::move(merges)), std::move(freqs)};
  }

 private:
  struct Entry {
    std::uint64_t count;
    std::uint64_t key;
  };

  // Max-heap on count; equal counts favour the smaller (left, right) strings.
  struct EntryLess {
    const std::vector<std::string>* vocab;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.count != b.count) return a.count < b.count;
      const auto& al = (*vocab)[a.key >> 32];
      const auto& bl = (*vocab)[b.key >> 32];
      if (al != bl) return al > bl;
      return (*vocab)[a.key & 0xFFFFFFFFu] > (*vocab)[b.key & 0xFFFFFFFFu];
    }
  };

  bool countable(TokenId a, TokenId b) const { return !unmergeable_[a] && !unmergeable_[b]; }

  void apply(TokenId left, TokenId right, TokenId product, std::uint64_t merged_key) {
    std::vector<std::uint32_t> affected = std::move(occurrences_[merged_key]);
    occurrences_.erase(merged_key);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

    std::unordered_map<std::uint64_t, std::int64_t> delta;
    std::vector<TokenId> merged;
    for (std::uint32_t wi : affected) {
      Word& w = words_[wi];
      const auto& s = w.symbols;
      merged.clear();
      bool changed = false;
      for (std::size_t i = 0; i < s.size();) {
        if (i + 1 < s.size() && s[i] == left && s[i + 1] == right) {
          merged.push_back(product);
          i += 2;
          changed = true;
        } else {
          merged.push_back(s[i++]);
        }
      }
      if (!changed) continue;
      const auto weight = static_cast<std::int64_t>(w.count);
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (countable(s[i], s[i + 1])) delta[key_of(s[i], s[i + 1])] -= weight;
      }
      for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        if (!countable(merged[i], merged[i + 1])) continue;
        const auto k = key_of(merged[i], merged[i + 1]);
        delta[k] += weight;
        if (merged[i] == product || merged[i + 1] == product) {
          auto& occ = occurrences_[k];
          if (occ.empty() || occ.back() != wi) occ.push_back(wi);
        }
      }
      w.symbols.swap(merged);
    }
    for (const auto& [k, d] : delta) {
      if (d == 0) continue;
      auto& c = counts_[k];
      c = static_cast<std::uint64_t>(static_cast<std::int64_t>(c) + d);
      if (d > 0) heap_.push(Entry{c, k});
      if (c == 0) counts_.erase(k);
    }
  }

  TrainConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<bool> unmergeable_;
  std::vector<Word> words_;
  std::unordered_map<std::uint64_t, std::uint64_t> counts_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> occurrences_;
  std::priority_queue<Entry, std::vector<Entry>, EntryLess> heap_{EntryLess{&vocab_}};
};

}  // namespace

std::vector<PairCount> count_pairs(const std::vector<WeightedSequence>& sequences) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i + 1 < seq.symbols.size(); ++i) {
      counts[{seq.symbols[i], seq.symbols[i + 1]}] += seq.count;
    }
  }
  std::vector<PairCount> out;
  out.reserve(counts.size());
  for (auto& [pair, n] : counts) {
    if (n > 0) out.push_back({pair.first, pair.second, n});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PairCount& a, const PairCount& b) { return a.frequency > b.frequency; });
  return out;
}

TrainOutput train_bpe_detailed(const std::vector<std::string>& corpus, const TrainConfig& config) {
  return FastTrainer(corpus, config).run();
}

TokenizerModel train_bpe(const std::vector<std::string>& corpus, const TrainConfig& config) {
  return train_bpe_detailed(corpus, config).model;
}

TrainOutput train_bpe_oracle_detailed(const std::vector<std::string>& corpus,
                                      const TrainConfig& config, std::size_t limit) {
  std::size_t total = 0;
  for (const auto& t : corpus) total += t.size();
  if (total > limit) {
    throw Error(ErrorCode::kCorpusTooLarge, "oracle trainer corpus of " + std::to_string(total) +
                                                " bytes exceeds the " + std::to_string(limit) +
                                                " byte guard");
  }
  if (config.min_pair_frequency == 0) {
    throw Error(ErrorCode::kConfigError, "min_pair_frequency must be positive");
  }
  check_base_size(config, kByteAlphabetSize);

  std::map<std::string, std::uint64_t> pieces;
  for (const auto& text : corpus) {
    for (std::string_view p : pretokenize(text, config.scheme)) ++pieces[std::string(p)];
  }

  // Char mode: symbols that are not vocabulary characters fall back to
  // bytes and never take part in merges; they are dropped as segment breaks.
  std::vector<std::string> chars;
  std::vector<WeightedSequence> words;
  if (config.mode == Mode::kCharLevelFallback) {
    std::set<std::string> distinct;
    for (const auto& [p, n] : pieces) {
      for (auto& s : base_symbols(p, config.mode)) {
        if (s.size() > 1 || static_cast<unsigned char>(s[0]) < 0x80) distinct.insert(s);
      }
    }
    chars.assign(distinct.begin(), distinct.end());
    for (const auto& [p, n] : pieces) {
      WeightedSequence seg{{}, n};
      for (auto& s : base_symbols(p, config.mode)) {
        if (distinct.count(s)) {
          seg.symbols.push_back(std::move(s));
        } else {
          if (!seg.symbols.empty()) words.push_back(seg);
          seg.symbols.clear();
        }
      }
      if (!seg.symbols.empty()) words.push_back(std::move(seg));
    }
  } else {
    for (const auto& [p, n] : pieces) words.push_back({base_symbols(p, config.mode), n});
  }

  std::vector<std::string> vocab = TokenizerModel::base(config.mode, config.scheme, chars).vocab();
  check_base_size(config, vocab.size());
  std::set<std::string> known(vocab.begin(), vocab.end());

  // Symbols are interned so that a full recount per merge stays cheap.
  std::vector<std::string> names;
  std::unordered_map<std::string, std::uint32_t> ids;
  auto intern = [&](const std::string& s) {
    auto [it, fresh] = ids.emplace(s, static_cast<std::uint32_t>(names.size()));
    if (fresh) names.push_back(s);
    return it->second;
  };
  std::vector<std::pair<std::vector<std::uint32_t>, std::uint64_t>> seqs;
  seqs.reserve(words.size());
  for (const auto& w : words) {
    std::vector<std::uint32_t> ids_of;
    ids_of.reserve(w.symbols.size());
    for (const auto& s : w.symbols) ids_of.push_back(intern(s));
    seqs.emplace_back(std::move(ids_of), w.count);
  }

  std::vector<MergeRule> merges;
  std::vector<std::uint64_t> freqs;
  while (vocab.size() < config.vocab_size) {
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    for (const auto& [seq, n] : seqs) {
      for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        counts[(std::uint64_t{seq[i]} << 32) | seq[i + 1]] += n;
      }
    }
    std::uint64_t best_key = 0;
    std::uint64_t best_freq = 0;
    for (const auto& [key, n] : counts) {
      const std::string& l = names[key >> 32];
      const std::string& r = names[key & 0xFFFFFFFFu];
      if (forbidden_product(config.mode, l, r)) continue;
      if (n > best_freq ||
          (n == best_freq && std::tie(l, r) < std::tie(names[best_key >> 32], names[best_key & 0xFFFFFFFFu]))) {
        best_key = key;
        best_freq = n;
      }
    }
    if (best_freq == 0 || best_freq < config.min_pair_frequency) break;
    const auto left = static_cast<std::uint32_t>(best_key >> 32);
    const auto right = static_cast<std::uint32_t>(best_key & 0xFFFFFFFFu);
    std::string product = names[left] + names[right];
    if (known.insert(product).second) vocab.push_back(product);
    merges.emplace_back(names[left], names[right]);
    freqs.push_back(best_freq);
    const std::uint32_t merged = intern(product);
    for (auto& [seq, n] : seqs) {
      std::size_t out = 0;
      for (std::size_t i = 0; i < seq.size();) {
        if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
          seq[out++] = merged;
          i += 2;
        } else {
          seq[out++] = seq[i++];
        }
      }
      seq.resize(out);
    }
  }
  return {TokenizerModel(config.mode, config.scheme, std::move(vocab), std::move(merges)),
          std::move(freqs)};
}

TokenizerModel train_bpe_oracle(const std::vector<std::string>& corpus, const TrainConfig& config,
                                std::size_t limit) {
  return train_bpe_oracle_detailed(corpus, config, limit).model;
}

TokenizerModel retrain_like(const TokenizerModel& reference, const std::vector<std::string>& corpus,
                            std::uint64_t min_pair_frequency, unsigned threads) {
  TrainConfig config;
  config.vocab_size = reference.size();
  config.mode = reference.mode();
  config.scheme = reference.scheme();
  config.min_pair_frequency = min_pair_frequency;
  config.threads = threads;
  return train_bpe(corpus, config);
}

}  // namespace convtok
