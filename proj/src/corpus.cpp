#include "convtok/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "convtok/error.hpp"
#include "convtok/hash.hpp"
#include "convtok/unicode.hpp"

namespace convtok {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord,
              "malformed record on line " + std::to_string(line) + ": " + what, line);
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(line, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) malformed(line, std::string("field \"") + key + "\" is not a string");
  return v.get<std::string>();
}

std::string ascii_lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

ConversationRecord parse_record(const json& obj, ConversationFormat format, std::size_t line) {
  if (!obj.is_object()) malformed(line, "not a JSON object");
  const bool lmsys = format == ConversationFormat::kLmsys;
  ConversationRecord rec;
  rec.id = require_string(obj, lmsys ? "conversation_id" : "id", line);
  rec.model_name = require_string(obj, "model", line);
  rec.language = require_string(obj, "language", line);
  if (lmsys) rec.language = ascii_lower(rec.language);

  const json& turns = require(obj, lmsys ? "conversation" : "turns", line);
  if (!turns.is_array() || turns.empty()) malformed(line, "turns must be a non-empty array");
  rec.turns.reserve(turns.size());
  for (const json& t : turns) {
    if (!t.is_object()) malformed(line, "turn is not an object");
    std::string role = require_string(t, "role", line);
    Turn turn;
    if (role == "user") {
      turn.role = Role::kUser;
    } else if (role == "assistant") {
      turn.role = Role::kAssistant;
    } else {
      malformed(line, "unknown role \"" + role + "\"");
    }
    turn.content = require_string(t, "content", line);
    rec.turns.push_back(std::move(turn));
  }
  return rec;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return in;
}

template <typename Set, typename Item>
SplitResult<Set> partition(const std::vector<Item>& items, const std::vector<bool>& is_train) {
  std::vector<Item> train;
  std::vector<Item> test;
  for (std::size_t i = 0; i < items.size(); ++i) {
    (is_train[i] ? train : test).push_back(items[i]);
  }
  if constexpr (std::is_same_v<Set, DocumentSet>) {
    return {DocumentSet{std::move(train)}, DocumentSet{std::move(test)}};
  } else {
    return {Set(std::move(train)), Set(std::move(test))};
  }
}

}  // namespace

ConversationSet::ConversationSet(std::vector<ConversationRecord> records)
    : records_(std::move(records)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!seen.insert(records_[i].id).second) {
      throw Error(ErrorCode::kMalformedRecord, "duplicate record id \"" + records_[i].id + "\"",
                  i + 1);
    }
  }
}

const char* to_string(RoleFilter filter) {
  switch (filter) {
    case RoleFilter::kUserOnly: return "user";
    case RoleFilter::kAssistantOnly: return "assistant";
    case RoleFilter::kBoth: return "both";
  }
  return "both";
}

RoleFilter parse_role_filter(const std::string& s) {
  if (s == "user" || s == "user_only") return RoleFilter::kUserOnly;
  if (s == "assistant" || s == "assistant_only") return RoleFilter::kAssistantOnly;
  if (s == "both") return RoleFilter::kBoth;
  throw Error(ErrorCode::kConfigError, "unknown role filter \"" + s + "\"");
}

ConversationSet parse_conversations(std::istream& in, ConversationFormat format) {
  std::vector<ConversationRecord> records;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    if (!unicode::is_valid_utf8(line)) {
      throw Error(ErrorCode::kInvalidEncoding,
                  "invalid UTF-8 on line " + std::to_string(line_no), line_no);
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed(line_no, e.what());
    }
    ConversationRecord rec = parse_record(obj, format, line_no);
    if (!ids.insert(rec.id).second) malformed(line_no, "duplicate id \"" + rec.id + "\"");
    records.push_back(std::move(rec));
  }
  return ConversationSet(std::move(records));
}

ConversationSet load_conversations(const std::filesystem::path& path, ConversationFormat format) {
  auto in = open_or_throw(path);
  return parse_conversations(in, format);
}

void write_conversations(std::ostream& out, const ConversationSet& set) {
  for (const auto& rec : set) {
    nlohmann::ordered_json obj;
    obj["id"] = rec.id;
    obj["model"] = rec.model_name;
    obj["language"] = rec.language;
    obj["turns"] = nlohmann::ordered_json::array();
    for (const auto& t : rec.turns) {
      obj["turns"].push_back(
          {{"role", t.role == Role::kUser ? "user" : "assistant"}, {"content", t.content}});
    }
    out << obj.dump() << '\n';
  }
}

DocumentSet parse_documents(std::istream& in) {
  DocumentSet docs;
  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> jsonl;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    if (!unicode::is_valid_utf8(line)) {
      throw Error(ErrorCode::kInvalidEncoding,
                  "invalid UTF-8 on line " + std::to_string(line_no), line_no);
    }
    if (!jsonl) {
      // The first non-blank line decides the format for the whole file.
      jsonl = false;
      if (line.front() == '{') {
        auto probe = json::parse(line, nullptr, false);
        jsonl = probe.is_object() && probe.contains("text");
      }
    }
    if (*jsonl) {
      auto obj = json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) malformed(line_no, "not a JSON object");
      std::string text = require_string(obj, "text", line_no);
      if (!text.empty()) docs.documents.push_back(std::move(text));
    } else {
      docs.documents.push_back(line);
    }
  }
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "document corpus contains no documents");
  return docs;
}

DocumentSet load_documents(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_documents(in);
}

std::vector<bool> split_assignment(const std::vector<std::string>& ids, const SplitSpec& spec) {
  if (ids.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot split an empty set");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::kConfigError, "train_fraction must lie in (0,1)");
  }
  const std::size_t n = ids.size();
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = keyed_hash(ids[i], spec.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return ids[a] < ids[b];
  });
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  std::vector<bool> is_train(n, false);
  for (std::size_t k = 0; k < n_train; ++k) is_train[order[k]] = true;
  return is_train;
}

SplitResult<ConversationSet> split(const ConversationSet& set, const SplitSpec& spec) {
  std::vector<std::string> ids;
  ids.reserve(set.size());
  for (const auto& r : set) ids.push_back(r.id);
  return partition<ConversationSet>(set.records(), split_assignment(ids, spec));
}

SplitResult<DocumentSet> split(const DocumentSet& set, const SplitSpec& spec) {
  std::vector<std::string> ids;
  ids.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) ids.push_back("doc:" + std::to_string(i));
  return partition<DocumentSet>(set.documents, split_assignment(ids, spec));
}

std::vector<std::string> extract_text(const ConversationSet& set, RoleFilter filter) {
  std::vector<std::string> out;
  for (const auto& rec : set) {
    for (const auto& t : rec.turns) {
      const bool keep = filter == RoleFilter::kBoth ||
                        (filter == RoleFilter::kUserOnly && t.role == Role::kUser) ||
                        (filter == RoleFilter::kAssistantOnly && t.role == Role::kAssistant);
      if (keep) out.push_back(t.content);
    }
  }
  return out;
}

std::map<std::string, std::size_t> language_histogram(const ConversationSet& set) {
  std::map<std::string, std::size_t> hist;
  for (const auto& rec : set) ++hist[rec.language];
  return hist;
}

ConversationSet filter_language(const ConversationSet& set, const std::string& language) {
  std::vector<ConversationRecord> out;
  for (const auto& rec : set) {
    if (rec.language == language) out.push_back(rec);
  }
  return ConversationSet(std::move(out));
}

DocumentSet take_byte_budget(const DocumentSet& set, std::size_t budget) {
  DocumentSet out;
  std::size_t used = 0;
  for (const auto& d : set.documents) {
    if (used + d.size() > budget) break;
    used += d.size();
    out.documents.push_back(d);
  }
  return out;
}

}  // namespace convtok
