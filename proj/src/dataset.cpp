#include "aqa/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "aqa/error.hpp"
#include "aqa/rng.hpp"

namespace aqa {

LabelSchema::LabelSchema(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(ErrorKind::config, "label schema is empty");
  auto sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::config, "label schema has duplicate labels");
}

bool LabelSchema::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t LabelSchema::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end())
    throw Error(ErrorKind::invalid_input, "label '" + std::string(label) + "' is not in the schema");
  return static_cast<std::size_t>(it - labels_.begin());
}

ContextVector LabelSchema::prototype(std::size_t index) const {
  std::vector<double> v(labels_.size(), 0.0);
  v.at(index) = 1.0;
  return ContextVector(std::move(v));
}

ContextVector encode_context(const QuestionRecord& q, const LabelSchema& schema) {
  return schema.prototype(schema.index_of(q.complexity_label));
}

Dataset parse_dataset(std::istream& in, const LabelSchema& schema) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::dataset, "line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      fail("not valid JSON");
    }
    if (!doc.is_object()) fail("record must be a JSON object");
    QuestionRecord q;
    auto str_field = [&](const char* name) -> std::string {
      if (!doc.contains(name)) fail(std::string("missing field '") + name + "'");
      if (!doc[name].is_string()) fail(std::string("field '") + name + "' must be a string");
      return doc[name].get<std::string>();
    };
    q.id = str_field("id");
    q.question = str_field("question");
    q.complexity_label = str_field("complexity_label");
    if (!doc.contains("gold_answers")) fail("missing field 'gold_answers'");
    const auto& golds = doc["gold_answers"];
    if (!golds.is_array() || golds.empty())
      fail("field 'gold_answers' must be a non-empty array of strings");
    for (const auto& g : golds) {
      if (!g.is_string()) fail("field 'gold_answers' must be a non-empty array of strings");
      q.gold_answers.push_back(g.get<std::string>());
    }
    if (!schema.contains(q.complexity_label))
      fail("complexity_label '" + q.complexity_label + "' is not in the schema");
    ++ds.label_counts[q.complexity_label];
    ds.records.push_back(std::move(q));
  }
  if (ds.records.empty()) throw Error(ErrorKind::dataset, "dataset has no records");

  for (const auto& label : schema.labels()) ds.label_counts.try_emplace(label, 0);
  std::size_t lo = ds.records.size(), hi = 0;
  for (const auto& [_, n] : ds.label_counts) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  if (lo != hi) {
    std::string msg = "unbalanced complexity labels:";
    for (const auto& [label, n] : ds.label_counts) msg += " " + label + "=" + std::to_string(n);
    ds.warnings.push_back(msg);
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const LabelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open dataset " + path.string());
  return parse_dataset(in, schema);
}

void write_dataset(std::ostream& out, const std::vector<QuestionRecord>& records) {
  for (const auto& q : records) {
    nlohmann::ordered_json doc = {{"id", q.id},
                                  {"question", q.question},
                                  {"gold_answers", q.gold_answers},
                                  {"complexity_label", q.complexity_label}};
    out << doc.dump() << '\n';
  }
}

std::vector<QuestionRecord> synthetic_questions(const LabelSchema& schema, std::size_t per_label,
                                                std::uint64_t seed, std::string_view prefix) {
  Rng rng(derive_seed(seed, Stream::dataset));
  std::uniform_int_distribution<int> value(1000, 9999);
  std::vector<QuestionRecord> out;
  std::size_t n = 0;
  for (const auto& label : schema.labels()) {
    for (std::size_t i = 0; i < per_label; ++i, ++n) {
      QuestionRecord q;
      q.id = std::string(prefix) + "-" + std::to_string(n);
      q.question = "Synthetic question " + std::to_string(n) + " of complexity " + label + "?";
      q.gold_answers = {"answer " + std::to_string(value(rng))};
      q.complexity_label = label;
      out.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace aqa
