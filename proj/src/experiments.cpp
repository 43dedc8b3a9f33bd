#include "convtok/experiments.hpp"

#include <fstream>
#include <sstream>

#include "convtok/error.hpp"
#include "convtok/hash.hpp"

namespace convtok {
namespace {

using ojson = nlohmann::ordered_json;

std::optional<double> round1(std::optional<double> v) {
  if (!v) return v;
  return std::stod(format_pct(*v));
}

ojson opt_number(std::optional<double> v) { return v ? ojson(*v) : ojson(nullptr); }

MetricsRow make_row(std::string scope, const TokenizerModel& base, const TokenizerModel* opt,
                    const std::vector<std::string>& texts) {
  MetricsRow row;
  row.scope = std::move(scope);
  row.tokens_base = count_tokens(base, texts);
  if (opt != nullptr) row.tokens_opt = count_tokens(*opt, texts);
  row.n_words = count_words(texts);
  return row;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "output directory " + dir.string() + " is not writable");
  }
}

std::string csv_opt(std::optional<double> v, bool pct) {
  if (!v) return "";
  return pct ? format_pct(*v) : format_ratio(*v);
}

ojson row_json(const MetricsRow& r) {
  ojson j;
  j["scope"] = r.scope;
  j["tokens_base"] = r.tokens_base;
  j["tokens_opt"] = r.tokens_opt ? ojson(*r.tokens_opt) : ojson(nullptr);
  j["reduction_pct"] = opt_number(round1(r.reduction_pct()));
  j["n_words"] = r.n_words;
  j["fertility_base"] = opt_number(r.fertility_base());
  j["fertility_opt"] = opt_number(r.fertility_opt());
  return j;
}

MetricsRow row_from_json(const nlohmann::json& j) {
  MetricsRow r;
  r.scope = j.at("scope").get<std::string>();
  r.tokens_base = j.at("tokens_base").get<std::uint64_t>();
  if (!j.at("tokens_opt").is_null()) r.tokens_opt = j.at("tokens_opt").get<std::uint64_t>();
  r.n_words = j.at("n_words").get<std::uint64_t>();
  return r;
}

}  // namespace

std::optional<double> MetricsRow::reduction_pct() const {
  if (!tokens_opt || tokens_base == 0) return std::nullopt;
  return ReductionResult{tokens_base, *tokens_opt}.reduction_pct();
}

std::optional<double> MetricsRow::fertility_base() const {
  if (n_words == 0) return std::nullopt;
  return FertilityResult{tokens_base, n_words}.fertility();
}

std::optional<double> MetricsRow::fertility_opt() const {
  if (n_words == 0 || !tokens_opt) return std::nullopt;
  return FertilityResult{*tokens_opt, n_words}.fertility();
}

const MetricsRow& FilterReport::all() const {
  for (const auto& r : rows) {
    if (r.scope == "all") return r;
  }
  throw Error(ErrorCode::kIntegrityError, "filter report has no \"all\" row");
}

const FilterReport* ExperimentReport::find(RoleFilter filter) const {
  for (const auto& f : filters) {
    if (f.filter == filter) return &f;
  }
  return nullptr;
}

ojson to_json(const ExperimentReport& report) {
  ojson j;
  j["experiment"] = report.experiment;
  j["corpus"] = report.corpus;
  j["language_threshold"] = report.language_threshold;
  ojson fert = ojson::array();
  for (const auto& r : report.fertility) fert.push_back(row_json(r));
  j["fertility"] = std::move(fert);
  ojson filters = ojson::array();
  for (const auto& f : report.filters) {
    ojson fj;
    fj["filter"] = to_string(f.filter);
    fj["model_checksum"] = f.model_checksum;
    ojson rows = ojson::array();
    for (const auto& r : f.rows) rows.push_back(row_json(r));
    fj["rows"] = std::move(rows);
    ojson langs = ojson::array();
    for (const auto& l : f.languages) {
      ojson lj;
      lj["language"] = l.language;
      lj["conversation_count"] = l.conversation_count;
      lj["tokens_base"] = l.reduction.tokens_base;
      lj["tokens_opt"] = l.reduction.tokens_opt;
      lj["reduction_pct"] = std::stod(format_pct(l.reduction.reduction_pct()));
      lj["n_words"] = l.n_words;
      langs.push_back(std::move(lj));
    }
    fj["languages"] = std::move(langs);
    filters.push_back(std::move(fj));
  }
  j["filters"] = std::move(filters);
  ojson prov;
  prov["config_hash"] = report.provenance.config_hash;
  prov["corpus_checksums"] = report.provenance.corpus_checksums;
  prov["base_model_checksum"] = report.provenance.base_model_checksum;
  prov["tool_version"] = report.provenance.tool_version;
  j["provenance"] = std::move(prov);
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.corpus = j.at("corpus").get<std::string>();
    r.language_threshold = j.at("language_threshold").get<std::size_t>();
    for (const auto& row : j.at("fertility")) r.fertility.push_back(row_from_json(row));
    for (const auto& fj : j.at("filters")) {
      FilterReport f;
      f.filter = parse_role_filter(fj.at("filter").get<std::string>());
      f.model_checksum = fj.at("model_checksum").get<std::string>();
      for (const auto& row : fj.at("rows")) f.rows.push_back(row_from_json(row));
      for (const auto& lj : fj.at("languages")) {
        LanguageRow l;
        l.language = lj.at("language").get<std::string>();
        l.conversation_count = lj.at("conversation_count").get<std::size_t>();
        l.reduction.tokens_base = lj.at("tokens_base").get<std::uint64_t>();
        l.reduction.tokens_opt = lj.at("tokens_opt").get<std::uint64_t>();
        l.n_words = lj.at("n_words").get<std::uint64_t>();
        f.languages.push_back(std::move(l));
      }
      r.filters.push_back(std::move(f));
    }
    const auto& p = j.at("provenance");
    r.provenance.config_hash = p.at("config_hash").get<std::string>();
    r.provenance.corpus_checksums = p.at("corpus_checksums").get<std::map<std::string, std::string>>();
    r.provenance.base_model_checksum = p.at("base_model_checksum").get<std::string>();
    r.provenance.tool_version = p.at("tool_version").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("report JSON: ") + e.what());
  }
}

ExperimentRunner::ExperimentRunner(ExperimentSpec spec) : spec_(std::move(spec)) {
  if (spec_.role_filters.empty()) {
    throw Error(ErrorCode::kConfigError, "at least one role filter is required");
  }
}

const ConversationSet& ExperimentRunner::conversations() {
  if (!conversations_) conversations_ = load_conversations(spec_.conversations_path, spec_.conversation_format);
  return *conversations_;
}

const SplitResult<ConversationSet>& ExperimentRunner::conversation_split() {
  if (!conversation_split_) conversation_split_ = split(conversations(), spec_.split);
  return *conversation_split_;
}

const DocumentSet& ExperimentRunner::documents() {
  if (!documents_) {
    if (spec_.documents_path.empty()) {
      throw Error(ErrorCode::kConfigError, "a documents corpus is required for this experiment");
    }
    documents_ = load_documents(spec_.documents_path);
  }
  return *documents_;
}

const SplitResult<DocumentSet>& ExperimentRunner::document_split() {
  if (!document_split_) document_split_ = split(documents(), spec_.split);
  return *document_split_;
}

const DocumentSet& ExperimentRunner::base_training_documents() {
  if (!base_documents_) {
    base_documents_ = take_byte_budget(document_split().train, spec_.document_byte_budget);
  }
  return *base_documents_;
}

const TokenizerModel& ExperimentRunner::base_model() {
  if (!base_) {
    if (spec_.base_model_path) {
      base_ = load_model(*spec_.base_model_path);
    } else {
      TrainConfig cfg;
      cfg.vocab_size = spec_.vocab_size;
      cfg.mode = spec_.mode;
      cfg.scheme = spec_.scheme;
      cfg.min_pair_frequency = spec_.min_pair_frequency;
      cfg.threads = spec_.threads;
      base_ = train_bpe(base_training_documents().documents, cfg);
    }
  }
  return *base_;
}

const TokenizerModel& ExperimentRunner::optimized_model(RoleFilter filter) {
  auto it = optimized_.find(filter);
  if (it == optimized_.end()) {
    auto corpus = extract_text(conversation_split().train, filter);
    it = optimized_
             .emplace(filter, retrain_like(base_model(), corpus, spec_.min_pair_frequency, spec_.threads))
             .first;
  }
  return it->second;
}

void ExperimentRunner::set_optimized_model(RoleFilter filter, TokenizerModel model) {
  optimized_.insert_or_assign(filter, std::move(model));
}

Provenance ExperimentRunner::provenance() {
  Provenance p;
  ojson cfg;
  cfg["conversation_format"] = spec_.conversation_format == ConversationFormat::kLmsys ? "lmsys" : "native";
  cfg["train_fraction"] = spec_.split.train_fraction;
  cfg["seed"] = spec_.split.seed;
  cfg["base_model"] = spec_.base_model_path ? "file" : "trained_on_documents";
  ojson filters = ojson::array();
  for (RoleFilter f : spec_.role_filters) filters.push_back(to_string(f));
  cfg["role_filters"] = std::move(filters);
  cfg["vocab_size"] = spec_.vocab_size;
  cfg["mode"] = to_string(spec_.mode);
  cfg["scheme"] = to_string(spec_.scheme);
  cfg["min_pair_frequency"] = spec_.min_pair_frequency;
  cfg["language_threshold"] = spec_.language_threshold;
  cfg["document_byte_budget"] = spec_.document_byte_budget;
  cfg["exp1_language"] = spec_.exp1_language ? ojson(*spec_.exp1_language) : ojson(nullptr);
  p.config_hash = to_hex(fnv1a64(cfg.dump()));
  if (!spec_.conversations_path.empty()) p.corpus_checksums["conversations"] = file_checksum(spec_.conversations_path);
  if (!spec_.documents_path.empty()) p.corpus_checksums["documents"] = file_checksum(spec_.documents_path);
  p.base_model_checksum = model_checksum(base_model());
  return p;
}

ExperimentReport ExperimentRunner::run_experiment1() {
  const TokenizerModel& base = base_model();
  ExperimentReport r;
  r.experiment = "exp1";
  r.corpus = "documents+conversations";
  r.language_threshold = spec_.language_threshold;
  r.fertility.push_back(make_row("documents", base, nullptr, document_split().test.documents));
  const ConversationSet convs =
      spec_.exp1_language ? filter_language(conversations(), *spec_.exp1_language) : conversations();
  r.fertility.push_back(make_row("all", base, nullptr, extract_text(convs, RoleFilter::kBoth)));
  r.fertility.push_back(make_row("user", base, nullptr, extract_text(convs, RoleFilter::kUserOnly)));
  r.fertility.push_back(
      make_row("assistant", base, nullptr, extract_text(convs, RoleFilter::kAssistantOnly)));
  for (const auto& row : r.fertility) {
    if (row.n_words == 0) {
      throw Error(ErrorCode::kNoWords, "experiment 1 scope \"" + row.scope + "\" has no words");
    }
  }
  r.provenance = provenance();
  return r;
}

ExperimentReport ExperimentRunner::run_experiment2() {
  const TokenizerModel& base = base_model();
  const ConversationSet& test = conversation_split().test;
  const auto test_all = extract_text(test, RoleFilter::kBoth);
  const auto test_user = extract_text(test, RoleFilter::kUserOnly);
  const auto test_assistant = extract_text(test, RoleFilter::kAssistantOnly);
  ExperimentReport r;
  r.experiment = "exp2";
  r.corpus = "conversations";
  r.language_threshold = spec_.language_threshold;
  for (RoleFilter filter : spec_.role_filters) {
    const TokenizerModel& opt = optimized_model(filter);
    FilterReport f;
    f.filter = filter;
    f.model_checksum = model_checksum(opt);
    f.rows.push_back(make_row("all", base, &opt, test_all));
    if (f.rows.back().tokens_base == 0) {
      throw Error(ErrorCode::kEmptyText, "conversation test split has no text");
    }
    f.rows.push_back(make_row("user", base, &opt, test_user));
    f.rows.push_back(make_row("assistant", base, &opt, test_assistant));
    f.languages = per_language_reduction(base, opt, test, spec_.language_threshold);
    for (const auto& l : f.languages) {
      MetricsRow row;
      row.scope = "language:" + l.language;
      row.tokens_base = l.reduction.tokens_base;
      row.tokens_opt = l.reduction.tokens_opt;
      row.n_words = l.n_words;
      f.rows.push_back(std::move(row));
    }
    r.filters.push_back(std::move(f));
  }
  r.provenance = provenance();
  return r;
}

ExperimentReport ExperimentRunner::run_experiment3() {
  const TokenizerModel& base = base_model();
  const auto& docs = document_split().test.documents;
  ExperimentReport r;
  r.experiment = "exp3";
  r.corpus = "documents";
  r.language_threshold = spec_.language_threshold;
  for (RoleFilter filter : spec_.role_filters) {
    const TokenizerModel& opt = optimized_model(filter);
    FilterReport f;
    f.filter = filter;
    f.model_checksum = model_checksum(opt);
    f.rows.push_back(make_row("all", base, &opt, docs));
    if (f.rows.back().tokens_base == 0) throw Error(ErrorCode::kEmptyText, "documents test split has no text");
    r.filters.push_back(std::move(f));
  }
  r.provenance = provenance();
  return r;
}

ExperimentReport run_experiment1(const ExperimentSpec& spec) { return ExperimentRunner(spec).run_experiment1(); }
ExperimentReport run_experiment2(const ExperimentSpec& spec) { return ExperimentRunner(spec).run_experiment2(); }
ExperimentReport run_experiment3(const ExperimentSpec& spec) { return ExperimentRunner(spec).run_experiment3(); }

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "scope,tokens_base,tokens_opt,reduction_pct,n_words,fertility_base,fertility_opt\n";
  for (const auto& r : rows) {
    out << r.scope << ',' << r.tokens_base << ',' << (r.tokens_opt ? std::to_string(*r.tokens_opt) : "")
        << ',' << csv_opt(r.reduction_pct(), true) << ',' << r.n_words << ','
        << csv_opt(r.fertility_base(), false) << ',' << csv_opt(r.fertility_opt(), false) << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& output_dir) {
  ensure_dir(output_dir);
  std::vector<std::filesystem::path> written;
  auto json_path = output_dir / ("report_" + report.experiment + ".json");
  write_file(json_path, to_json(report).dump(2) + "\n");
  written.push_back(json_path);
  if (!report.fertility.empty()) {
    auto p = output_dir / ("metrics_" + report.experiment + ".csv");
    write_file(p, metrics_csv(report.fertility));
    written.push_back(p);
  }
  for (const auto& f : report.filters) {
    auto p = output_dir / ("metrics_" + report.experiment + "_" + to_string(f.filter) + ".csv");
    write_file(p, metrics_csv(f.rows));
    written.push_back(p);
  }
  return written;
}

std::vector<std::filesystem::path> emit_plot_data(const ExperimentReport& report,
                                                  const std::filesystem::path& output_dir) {
  ensure_dir(output_dir);
  std::vector<std::filesystem::path> written;
  if (report.experiment == "exp1") {
    std::ostringstream out;
    out << "scope,n_tokens,n_words,fertility\n";
    for (const auto& r : report.fertility) {
      out << (r.scope == "all" ? "conversations" : r.scope) << ',' << r.tokens_base << ',' << r.n_words
          << ',' << csv_opt(r.fertility_base(), false) << '\n';
    }
    written.push_back(output_dir / "fig1_fertility.csv");
    write_file(written.back(), out.str());
  } else if (report.experiment == "exp2") {
    std::ostringstream bars;
    bars << "filter,tokens_base,tokens_opt,reduction_pct\n";
    for (const auto& f : report.filters) {
      const auto& a = f.all();
      bars << to_string(f.filter) << ',' << a.tokens_base << ',' << *a.tokens_opt << ','
           << format_pct(*a.reduction_pct()) << '\n';
    }
    written.push_back(output_dir / "fig2_reduction.csv");
    write_file(written.back(), bars.str());

    // One row per language; one reduction column per filter.
    std::ostringstream langs;
    langs << "language,conversation_count";
    for (const auto& f : report.filters) langs << ",reduction_" << to_string(f.filter);
    langs << '\n';
    if (!report.filters.empty()) {
      for (const auto& l : report.filters.front().languages) {
        langs << l.language << ',' << l.conversation_count;
        for (const auto& f : report.filters) {
          std::string cell;
          for (const auto& fl : f.languages) {
            if (fl.language == l.language) cell = format_pct(fl.reduction.reduction_pct());
          }
          langs << ',' << cell;
        }
        langs << '\n';
      }
    }
    written.push_back(output_dir / "fig3_languages.csv");
    write_file(written.back(), langs.str());
  } else if (report.experiment == "exp3") {
    std::ostringstream out;
    out << "filter,tokens_base,tokens_opt,reduction_pct,increase_pct\n";
    for (const auto& f : report.filters) {
      const auto& a = f.all();
      out << to_string(f.filter) << ',' << a.tokens_base << ',' << *a.tokens_opt << ','
          << format_pct(*a.reduction_pct()) << ',' << format_pct(-*a.reduction_pct()) << '\n';
    }
    written.push_back(output_dir / "fig4_documents.csv");
    write_file(written.back(), out.str());
  }
  return written;
}

std::vector<std::filesystem::path> save_models(ExperimentRunner& runner,
                                               const std::filesystem::path& output_dir) {
  ensure_dir(output_dir);
  std::vector<std::filesystem::path> written;
  written.push_back(output_dir / "base.json");
  save_model(runner.base_model(), written.back());
  for (RoleFilter f : runner.spec().role_filters) {
    written.push_back(output_dir / (std::string("opt_") + to_string(f) + ".json"));
    save_model(runner.optimized_model(f), written.back());
  }
  return written;
}

std::string model_checksum(const TokenizerModel& model) {
  return to_hex(fnv1a64(serialize_model(model)));
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return to_hex(h);
}

}  // namespace convtok
