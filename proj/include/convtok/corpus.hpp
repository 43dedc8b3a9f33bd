#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace convtok {

enum class Role : std::uint8_t { kUser, kAssistant };

struct Turn {
  Role role;
  std::string content;

  bool operator==(const Turn&) const = default;
};

struct ConversationRecord {
  std::string id;
  std::string model_name;
  std::vector<Turn> turns;
  std::string language;

  bool operator==(const ConversationRecord&) const = default;
};

// Conversations in file order. Ids are unique; construction through
// `ConversationSet(records)` enforces it.
class ConversationSet {
 public:
  ConversationSet() = default;
  explicit ConversationSet(std::vector<ConversationRecord> records);

  const std::vector<ConversationRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const ConversationRecord& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  bool operator==(const ConversationSet&) const = default;

 private:
  std::vector<ConversationRecord> records_;
};

struct DocumentSet {
  std::vector<std::string> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  bool operator==(const DocumentSet&) const = default;
};

enum class RoleFilter : std::uint8_t { kUserOnly, kAssistantOnly, kBoth };

const char* to_string(RoleFilter filter);
RoleFilter parse_role_filter(const std::string& s);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

enum class ConversationFormat : std::uint8_t {
  kNative,  // {"id","model","language","turns":[{"role","content"}]}
  kLmsys,   // {"conversation_id","model","language","conversation":[...]}
};

ConversationSet load_conversations(const std::filesystem::path& path,
                                   ConversationFormat format = ConversationFormat::kNative);
ConversationSet parse_conversations(std::istream& in,
                                    ConversationFormat format = ConversationFormat::kNative);

void write_conversations(std::ostream& out, const ConversationSet& set);

DocumentSet load_documents(const std::filesystem::path& path);
DocumentSet parse_documents(std::istream& in);

template <typename Set>
struct SplitResult {
  Set train;
  Set test;
};

// Records are ranked by keyed_hash(id, seed) and the first
// round(train_fraction * N) go to train. Each side keeps input order.
SplitResult<ConversationSet> split(const ConversationSet& set, const SplitSpec& spec);

// Documents have no ids; their 0-based position in the file serves as the id.
SplitResult<DocumentSet> split(const DocumentSet& set, const SplitSpec& spec);

// Returns one flag per input id: true = train.
std::vector<bool> split_assignment(const std::vector<std::string>& ids, const SplitSpec& spec);

std::vector<std::string> extract_text(const ConversationSet& set, RoleFilter filter);

std::map<std::string, std::size_t> language_histogram(const ConversationSet& set);

// Subset of conversations tagged `language`, order preserved.
ConversationSet filter_language(const ConversationSet& set, const std::string& language);

// Prefix of the documents whose cumulative byte size stays within `budget`.
DocumentSet take_byte_budget(const DocumentSet& set, std::size_t budget);

}  // namespace convtok
