#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "convtok/corpus.hpp"
#include "convtok/metrics.hpp"
#include "convtok/tokenizer.hpp"
#include "convtok/trainer.hpp"

namespace convtok {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr std::size_t kDefaultDocumentBudget = std::size_t{8} << 20;
inline constexpr std::size_t kDefaultVocabSize = 8192;

struct ExperimentSpec {
  std::filesystem::path conversations_path;
  ConversationFormat conversation_format = ConversationFormat::kNative;
  // Needed when no base model is given, and for experiments 1 and 3.
  std::filesystem::path documents_path;
  SplitSpec split;
  // When unset, the base tokenizer is trained on the documents train split.
  std::optional<std::filesystem::path> base_model_path;
  std::vector<RoleFilter> role_filters{RoleFilter::kUserOnly, RoleFilter::kAssistantOnly,
                                       RoleFilter::kBoth};
  std::size_t vocab_size = kDefaultVocabSize;
  Mode mode = Mode::kByteLevel;
  PretokenScheme scheme = PretokenScheme::kCategorySplit;
  std::uint64_t min_pair_frequency = 2;
  std::size_t language_threshold = kDefaultLanguageThreshold;
  std::size_t document_byte_budget = kDefaultDocumentBudget;
  // Restricts the conversation scopes of experiment 1 to one language tag.
  std::optional<std::string> exp1_language;
  std::filesystem::path output_dir = ".";
  unsigned threads = 0;
};

// One line of the metrics table. Experiment 1 rows have no optimized side.
struct MetricsRow {
  std::string scope;
  std::uint64_t tokens_base = 0;
  std::optional<std::uint64_t> tokens_opt;
  std::uint64_t n_words = 0;

  std::optional<double> reduction_pct() const;
  std::optional<double> fertility_base() const;
  std::optional<double> fertility_opt() const;
  bool operator==(const MetricsRow&) const = default;
};

struct FilterReport {
  RoleFilter filter = RoleFilter::kBoth;
  std::string model_checksum;
  std::vector<MetricsRow> rows;  // "all" first
  std::vector<LanguageRow> languages;

  const MetricsRow& all() const;
};

struct Provenance {
  std::string config_hash;
  std::map<std::string, std::string> corpus_checksums;
  std::string base_model_checksum;
  std::string tool_version = kToolVersion;
};

struct ExperimentReport {
  std::string experiment;  // "exp1" | "exp2" | "exp3"
  std::string corpus;      // evaluated corpus: "documents+conversations" | "conversations" | "documents"
  std::vector<MetricsRow> fertility;   // experiment 1: documents, all, user, assistant
  std::vector<FilterReport> filters;   // experiments 2 and 3
  std::size_t language_threshold = kDefaultLanguageThreshold;
  Provenance provenance;

  const FilterReport* find(RoleFilter filter) const;
};

nlohmann::ordered_json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

// Lazily loads corpora, splits and trains models; every accessor caches
// its result, so the three experiments can share one runner.
class ExperimentRunner {
 public:
  explicit ExperimentRunner(ExperimentSpec spec);

  const ExperimentSpec& spec() const { return spec_; }
  const ConversationSet& conversations();
  const SplitResult<ConversationSet>& conversation_split();
  const DocumentSet& documents();
  const SplitResult<DocumentSet>& document_split();
  // Documents used to train the base model: train split within the byte budget.
  const DocumentSet& base_training_documents();
  const TokenizerModel& base_model();
  const TokenizerModel& optimized_model(RoleFilter filter);
  void set_optimized_model(RoleFilter filter, TokenizerModel model);

  ExperimentReport run_experiment1();
  ExperimentReport run_experiment2();
  ExperimentReport run_experiment3();

  Provenance provenance();

 private:
  ExperimentSpec spec_;
  std::optional<ConversationSet> conversations_;
  std::optional<SplitResult<ConversationSet>> conversation_split_;
  std::optional<DocumentSet> documents_;
  std::optional<SplitResult<DocumentSet>> document_split_;
  std::optional<DocumentSet> base_documents_;
  std::optional<TokenizerModel> base_;
  std::map<RoleFilter, TokenizerModel> optimized_;
};

ExperimentReport run_experiment1(const ExperimentSpec& spec);
ExperimentReport run_experiment2(const ExperimentSpec& spec);
ExperimentReport run_experiment3(const ExperimentSpec& spec);

// Metrics CSV: scope,tokens_base,tokens_opt,reduction_pct,n_words,fertility_base,fertility_opt
std::string metrics_csv(const std::vector<MetricsRow>& rows);

// Writes report_<id>.json plus one metrics CSV per filter.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& output_dir);

// One CSV per figure analog present in the report:
//   exp1 -> fig1_fertility.csv, exp2 -> fig2_reduction.csv + fig3_languages.csv,
//   exp3 -> fig4_documents.csv
std::vector<std::filesystem::path> emit_plot_data(const ExperimentReport& report,
                                                  const std::filesystem::path& output_dir);

// Saves base.json and opt_<filter>.json for every model the runner holds.
std::vector<std::filesystem::path> save_models(ExperimentRunner& runner,
                                               const std::filesystem::path& output_dir);

std::string model_checksum(const TokenizerModel& model);
std::string file_checksum(const std::filesystem::path& path);

}  // namespace convtok
