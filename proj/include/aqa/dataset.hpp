#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aqa/linucb.hpp"

namespace aqa {

struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  std::string complexity_label;
};

/// Ordered set of complexity labels; position i is one-hot feature i.
class LabelSchema {
 public:
  LabelSchema() : LabelSchema({"A", "B", "C"}) {}
  explicit LabelSchema(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  bool contains(std::string_view label) const;
  std::size_t index_of(std::string_view label) const;

  /// One-hot context for the label at `index`.
  ContextVector prototype(std::size_t index) const;

 private:
  std::vector<std::string> labels_;
};

struct Dataset {
  std::vector<QuestionRecord> records;
  std::map<std::string, std::size_t> label_counts;
  /// Non-fatal findings such as an unbalanced label distribution.
  std::vector<std::string> warnings;
};

/// JSONL, one {"id","question","gold_answers":[...],"complexity_label"} per
/// line. Blank lines are skipped. Errors name the 1-based line.
Dataset parse_dataset(std::istream& in, const LabelSchema& schema);
Dataset load_dataset(const std::filesystem::path& path, const LabelSchema& schema);

void write_dataset(std::ostream& out, const std::vector<QuestionRecord>& records);

ContextVector encode_context(const QuestionRecord& q, const LabelSchema& schema);

/// Balanced synthetic questions (`per_label` of each label) with single-token
/// numeric gold answers. Ordered label-major, ids "<prefix>-<n>".
std::vector<QuestionRecord> synthetic_questions(const LabelSchema& schema, std::size_t per_label,
                                                std::uint64_t seed, std::string_view prefix);

}  // namespace aqa
