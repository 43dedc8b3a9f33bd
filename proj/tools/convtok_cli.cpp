// convtok: train BPE tokenizers on conversation corpora and measure token
// savings against a baseline-domain tokenizer.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "convtok/corpus.hpp"
#include "convtok/error.hpp"
#include "convtok/experiments.hpp"
#include "convtok/metrics.hpp"
#include "convtok/tokenizer.hpp"
#include "convtok/trainer.hpp"

namespace fs = std::filesystem;
using namespace convtok;
using ojson = nlohmann::ordered_json;

namespace {

struct CommonOptions {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::size_t vocab_size = kDefaultVocabSize;
  std::string mode = "byte_level";
  std::string scheme = "category_split";
  std::size_t threshold = kDefaultLanguageThreshold;
  std::uint64_t min_pair_frequency = 2;
  std::string out;
  unsigned threads = 0;
};

void add_common(CLI::App* app, CommonOptions& o, bool out_required) {
  app->add_option("--seed", o.seed, "Split seed");
  app->add_option("--train-fraction", o.train_fraction, "Fraction of records in the train split");
  app->add_option("--vocab-size", o.vocab_size, "Target vocabulary size");
  app->add_option("--mode", o.mode, "byte_level | char_level_fallback");
  app->add_option("--scheme", o.scheme, "category_split | whitespace_split");
  app->add_option("--threshold", o.threshold, "Minimum conversations (exclusive) per language row");
  app->add_option("--min-pair-frequency", o.min_pair_frequency, "Stop merging below this frequency");
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  auto* out = app->add_option("--out", o.out, "Output path");
  if (out_required) out->required();
}

enum class CorpusKind { kAuto, kConversations, kDocuments };

CorpusKind detect_kind(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && (j.contains("turns") || j.contains("conversation"))) return CorpusKind::kConversations;
    return CorpusKind::kDocuments;
  }
  return CorpusKind::kDocuments;
}

std::vector<std::string> load_corpus_text(const fs::path& path, const std::string& kind_name, bool lmsys,
                                          RoleFilter filter) {
  CorpusKind kind = kind_name == "conversations" ? CorpusKind::kConversations
                    : kind_name == "documents"   ? CorpusKind::kDocuments
                                                 : detect_kind(path);
  if (lmsys) kind = CorpusKind::kConversations;
  if (kind == CorpusKind::kConversations) {
    auto set = load_conversations(path, lmsys ? ConversationFormat::kLmsys : ConversationFormat::kNative);
    return extract_text(set, filter);
  }
  return load_documents(path).documents;
}

std::vector<RoleFilter> parse_filters(const std::vector<std::string>& names) {
  std::vector<RoleFilter> out;
  for (const auto& n : names) out.push_back(parse_role_filter(n));
  return out;
}

void print_error(const std::string& code, const std::string& message, std::optional<std::size_t> line) {
  ojson e;
  e["error"] = code;
  e["message"] = message;
  if (line) e["line"] = *line;
  std::cerr << e.dump() << std::endl;
}

void print_report_summary(const ExperimentReport& r, std::ostream& os) {
  os << r.experiment << " (" << r.corpus << ")\n";
  for (const auto& row : r.fertility) {
    os << "  " << row.scope << ": tokens=" << row.tokens_base << " words=" << row.n_words
       << " fertility=" << format_ratio(*row.fertility_base()) << "\n";
  }
  for (const auto& f : r.filters) {
    for (const auto& row : f.rows) {
      os << "  [" << to_string(f.filter) << "] " << row.scope << ": base=" << row.tokens_base
         << " opt=" << *row.tokens_opt << " reduction=" << format_pct(*row.reduction_pct()) << "%\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conversation-aware BPE tokenizer training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // ingest
  CommonOptions ingest_opts;
  std::string ingest_conv, ingest_docs;
  bool ingest_lmsys = false;
  auto* ingest = app.add_subcommand("ingest", "Parse corpora, report counts and language histogram");
  ingest->add_option("--conversations", ingest_conv, "Conversation JSONL");
  ingest->add_option("--documents", ingest_docs, "Document corpus (text lines or JSONL)");
  ingest->add_flag("--lmsys", ingest_lmsys, "Conversation file uses LMSYS field names");
  add_common(ingest, ingest_opts, false);

  // train
  CommonOptions train_opts;
  std::string train_corpus, train_kind = "auto", train_filter = "both";
  bool train_lmsys = false;
  auto* train = app.add_subcommand("train", "Train a BPE tokenizer");
  train->add_option("--corpus", train_corpus, "Training corpus")->required();
  train->add_option("--corpus-kind", train_kind, "auto | conversations | documents");
  train->add_option("--role-filter", train_filter, "user | assistant | both");
  train->add_flag("--lmsys", train_lmsys, "Conversation file uses LMSYS field names");
  add_common(train, train_opts, true);

  // encode
  CommonOptions encode_opts;
  std::string encode_model, encode_text, encode_input, encode_ids;
  auto* encode = app.add_subcommand("encode", "Encode text (or decode ids) with a model");
  encode->add_option("--model", encode_model, "Model JSON")->required();
  auto* text_opt = encode->add_option("--text", encode_text, "Text to encode");
  auto* input_opt = encode->add_option("--input", encode_input, "File whose lines are encoded");
  auto* ids_opt = encode->add_option("--decode", encode_ids, "Space-separated ids to decode");
  text_opt->excludes(input_opt)->excludes(ids_opt);
  input_opt->excludes(ids_opt);
  add_common(encode, encode_opts, false);

  // fertility
  CommonOptions fert_opts;
  std::string fert_model, fert_corpus, fert_kind = "auto", fert_filter = "both";
  bool fert_lmsys = false;
  auto* fert = app.add_subcommand("fertility", "Tokens per word of a model on a corpus");
  fert->add_option("--model", fert_model, "Model JSON")->required();
  fert->add_option("--corpus", fert_corpus, "Corpus")->required();
  fert->add_option("--corpus-kind", fert_kind, "auto | conversations | documents");
  fert->add_option("--role-filter", fert_filter, "user | assistant | both");
  fert->add_flag("--lmsys", fert_lmsys, "Conversation file uses LMSYS field names");
  add_common(fert, fert_opts, false);

  // exp1..exp3 share one option set
  CommonOptions exp_opts;
  std::string exp_conv, exp_docs, exp_base, exp_language, exp_models_dir;
  std::vector<std::string> exp_filters{"user", "assistant", "both"};
  std::size_t exp_budget = kDefaultDocumentBudget;
  bool exp_lmsys = false;
  std::vector<CLI::App*> exps;
  for (const char* name : {"exp1", "exp2", "exp3"}) {
    const std::string n = name;
    const char* desc = n == "exp1"   ? "Fertility of the base tokenizer on documents vs conversations"
                       : n == "exp2" ? "Token reduction of conversation-retrained tokenizers on held-out conversations"
                                     : "Token change of conversation-retrained tokenizers on documents";
    auto* e = app.add_subcommand(name, desc);
    e->add_option("--conversations", exp_conv, "Conversation JSONL")->required();
    e->add_option("--documents", exp_docs, "Document corpus");
    e->add_option("--base-model", exp_base, "Base model JSON (default: train on documents)");
    e->add_option("--role-filters", exp_filters, "Subset of user,assistant,both")->delimiter(',');
    e->add_option("--budget", exp_budget, "Byte budget of documents used for base training");
    e->add_flag("--lmsys", exp_lmsys, "Conversation file uses LMSYS field names");
    if (n == "exp1") e->add_option("--language", exp_language, "Restrict conversation scopes to one language");
    if (n == "exp3") e->add_option("--models-dir", exp_models_dir, "Reuse base/opt models saved by exp2");
    add_common(e, exp_opts, true);
    exps.push_back(e);
  }

  // report
  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Summarize a report JSON and re-emit its plot data");
  report->add_option("--in", report_in, "report_<exp>.json")->required();
  report->add_option("--out", report_out, "Directory for plot CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("UsageError", e.what(), std::nullopt);
    return 2;
  }

  try {
    if (ingest->parsed()) {
      ojson out;
      if (!ingest_conv.empty()) {
        auto set = load_conversations(ingest_conv, ingest_lmsys ? ConversationFormat::kLmsys : ConversationFormat::kNative);
        out["conversations"] = set.size();
        out["languages"] = language_histogram(set);
        if (!ingest_opts.out.empty()) {
          std::ofstream f(ingest_opts.out, std::ios::binary);
          if (!f) throw Error(ErrorCode::kIoError, "cannot write " + ingest_opts.out);
          write_conversations(f, set);
        }
      }
      if (!ingest_docs.empty()) {
        auto docs = load_documents(ingest_docs);
        std::size_t bytes = 0;
        for (const auto& d : docs.documents) bytes += d.size();
        out["documents"] = docs.size();
        out["document_bytes"] = bytes;
      }
      std::cout << out.dump() << std::endl;
    } else if (train->parsed()) {
      auto texts = load_corpus_text(train_corpus, train_kind, train_lmsys, parse_role_filter(train_filter));
      TrainConfig cfg;
      cfg.vocab_size = train_opts.vocab_size;
      cfg.mode = parse_mode(train_opts.mode);
      cfg.scheme = parse_scheme(train_opts.scheme);
      cfg.min_pair_frequency = train_opts.min_pair_frequency;
      cfg.threads = train_opts.threads;
      auto model = train_bpe(texts, cfg);
      save_model(model, train_opts.out);
      ojson out;
      out["out"] = train_opts.out;
      out["vocab_size"] = model.size();
      out["merges"] = model.merges().size();
      out["checksum"] = model_checksum(model);
      std::cout << out.dump() << std::endl;
    } else if (encode->parsed()) {
      auto model = load_model(encode_model);
      if (!ids_opt->empty()) {
        std::vector<TokenId> ids;
        std::istringstream ss(encode_ids);
        long long v;
        while (ss >> v) {
          if (v < 0) throw Error(ErrorCode::kIdOutOfRange, "negative token id");
          ids.push_back(static_cast<TokenId>(v));
        }
        std::cout << model.decode(ids);
        return 0;
      }
      auto emit = [&](const std::string& text) {
        ojson out;
        auto ids = model.encode(text);
        out["n_tokens"] = ids.size();
        out["ids"] = ids;
        std::cout << out.dump() << '\n';
      };
      if (!input_opt->empty()) {
        std::ifstream in(encode_input, std::ios::binary);
        if (!in) throw Error(ErrorCode::kIoError, "cannot open " + encode_input);
        std::string line;
        while (std::getline(in, line)) emit(line);
      } else {
        emit(encode_text);
      }
    } else if (fert->parsed()) {
      auto model = load_model(fert_model);
      auto texts = load_corpus_text(fert_corpus, fert_kind, fert_lmsys, parse_role_filter(fert_filter));
      auto r = fertility(model, texts);
      ojson out;
      out["n_tokens"] = r.n_tokens;
      out["n_words"] = r.n_words;
      out["fertility"] = std::stod(format_ratio(r.fertility()));
      std::cout << out.dump() << std::endl;
    } else if (report->parsed()) {
      std::ifstream in(report_in, std::ios::binary);
      if (!in) throw Error(ErrorCode::kIoError, "cannot open " + report_in);
      auto j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::kMalformedRecord, report_in + " is not JSON");
      auto r = report_from_json(j);
      print_report_summary(r, std::cout);
      if (!report_out.empty()) {
        for (const auto& p : emit_plot_data(r, report_out)) std::cout << "wrote " << p.string() << "\n";
      }
    } else {
      ExperimentSpec spec;
      spec.conversations_path = exp_conv;
      spec.conversation_format = exp_lmsys ? ConversationFormat::kLmsys : ConversationFormat::kNative;
      spec.documents_path = exp_docs;
      spec.split = {exp_opts.train_fraction, exp_opts.seed};
      if (!exp_base.empty()) spec.base_model_path = exp_base;
      spec.role_filters = parse_filters(exp_filters);
      spec.vocab_size = exp_opts.vocab_size;
      spec.mode = parse_mode(exp_opts.mode);
      spec.scheme = parse_scheme(exp_opts.scheme);
      spec.min_pair_frequency = exp_opts.min_pair_frequency;
      spec.language_threshold = exp_opts.threshold;
      spec.document_byte_budget = exp_budget;
      if (!exp_language.empty()) spec.exp1_language = exp_language;
      spec.output_dir = exp_opts.out;
      spec.threads = exp_opts.threads;

      ExperimentRunner runner(spec);
      ExperimentReport r;
      std::vector<fs::path> written;
      if (exps[0]->parsed()) {
        r = runner.run_experiment1();
        fs::create_directories(spec.output_dir);
        written.push_back(spec.output_dir / "base.json");
        save_model(runner.base_model(), written.back());
      } else if (exps[1]->parsed()) {
        r = runner.run_experiment2();
        written = save_models(runner, spec.output_dir);
      } else {
        if (!exp_models_dir.empty()) {
          const fs::path dir = exp_models_dir;
          if (!spec.base_model_path) {
            spec.base_model_path = dir / "base.json";
            runner = ExperimentRunner(spec);
          }
          for (RoleFilter f : spec.role_filters) {
            runner.set_optimized_model(f, load_model(dir / (std::string("opt_") + to_string(f) + ".json")));
          }
        }
        r = runner.run_experiment3();
      }
      for (const auto& p : write_report(r, spec.output_dir)) written.push_back(p);
      for (const auto& p : emit_plot_data(r, spec.output_dir)) written.push_back(p);
      print_report_summary(r, std::cout);
      for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
    }
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what(), e.line());
    return 1;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what(), std::nullopt);
    return 1;
  }
  return 0;
}
