// SPDX-License-Identifier: Apache-2.0
#include "corelite/corpus.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_set>

#include <json.hpp>

#include "corelite/error.hpp"
#include "io_util.hpp"

namespace corelite {
namespace {

using nlohmann::json;

constexpr std::string_view kEmbeddingMagic = "EMB1";

std::string line_prefix(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

// Calls fn(line_no, line) for each LF-terminated line; a missing final LF
// still yields the last line. Trailing CR is removed.
template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    start = end + 1;
  }
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

json parse_record(std::size_t line_no, std::string_view line) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Format, line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
  }
  if (!record.is_object())
    throw Error(ErrorKind::Format, line_prefix(line_no) + "expected a JSON object");
  return record;
}

std::string string_field(const json& record, std::size_t line_no, const char* name) {
  auto it = record.find(name);
  if (it == record.end())
    throw Error(ErrorKind::Format, line_prefix(line_no) + "missing field " + name);
  if (!it->is_string())
    throw Error(ErrorKind::Format, line_prefix(line_no) + "field " + name + " must be a string");
  return it->get<std::string>();
}

std::string checked_id(const json& record, std::size_t line_no,
                       std::unordered_set<std::string>& seen) {
  std::string id = string_field(record, line_no, "id");
  if (id.empty()) throw Error(ErrorKind::Data, line_prefix(line_no) + "empty id");
  if (!seen.insert(id).second)
    throw Error(ErrorKind::Data, line_prefix(line_no) + "duplicate id " + id);
  return id;
}

std::vector<std::string> split_csv_line(std::size_t line_no, std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"' && fields.back().empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw Error(ErrorKind::Format, line_prefix(line_no) + "unterminated quote");
  return fields;
}

double parse_real(std::size_t line_no, std::string_view text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value))
    throw Error(ErrorKind::Format,
                line_prefix(line_no) + "unparseable score '" + std::string(text) + "'");
  return value;
}

std::uint64_t parse_count(std::size_t line_no, std::string_view text) {
  std::uint64_t value = 0;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (text.empty() || ec != std::errc{} || ptr != last || value == 0)
    throw Error(ErrorKind::Format,
                line_prefix(line_no) + "count must be a positive integer, got '" +
                    std::string(text) + "'");
  return value;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim,
                                 std::vector<float> data)
    : ids_(std::move(ids)), dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "embedding width must be > 0");
  if (data_.size() != ids_.size() * dim_)
    throw Error(ErrorKind::InvalidArgument,
                "embedding payload has " + std::to_string(data_.size()) +
                    " values, expected " + std::to_string(ids_.size() * dim_));
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids_) {
    if (id.empty()) throw Error(ErrorKind::Data, "empty embedding id");
    if (!seen.insert(id).second) throw Error(ErrorKind::Data, "duplicate id " + id);
  }
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i]))
      throw Error(ErrorKind::Data, "row " + std::to_string(i / dim_) + ": non-finite value");
}

EmbeddingMatrix EmbeddingMatrix::zeros(std::vector<std::string> ids, std::size_t dim) {
  std::vector<float> data(ids.size() * dim, 0.0f);
  return EmbeddingMatrix(std::move(ids), dim, std::move(data));
}

void ScoreTable::insert(std::string model, std::string dataset, double score,
                        std::optional<std::uint64_t> count) {
  if (!std::isfinite(score))
    throw Error(ErrorKind::Data, "non-finite score for (" + model + ", " + dataset + ")");
  if (count && *count == 0)
    throw Error(ErrorKind::Data, "zero instance count for (" + model + ", " + dataset + ")");
  ScoreKey key{model, dataset};
  if (!entries_.emplace(std::move(key), ScoreEntry{score, count}).second)
    throw Error(ErrorKind::Data, "duplicate entry (" + model + ", " + dataset + ")");
}

const ScoreEntry* ScoreTable::find(std::string_view model, std::string_view dataset) const {
  auto it = entries_.find(ScoreKey{std::string(model), std::string(dataset)});
  return it == entries_.end() ? nullptr : &it->second;
}

std::set<std::string> ScoreTable::models() const {
  std::set<std::string> out;
  for (const auto& [key, _] : entries_) out.insert(key.model);
  return out;
}

std::set<std::string> ScoreTable::datasets() const {
  std::set<std::string> out;
  for (const auto& [key, _] : entries_) out.insert(key.dataset);
  return out;
}

void ScaleSpec::set(std::string dataset, Scale scale) {
  if (!std::isfinite(scale.min) || !std::isfinite(scale.max) || !(scale.max > scale.min))
    throw Error(ErrorKind::Data, "scale for " + dataset + " needs finite max > min");
  scales_[std::move(dataset)] = scale;
}

const Scale* ScaleSpec::find(std::string_view dataset) const {
  auto it = scales_.find(dataset);
  return it == scales_.end() ? nullptr : &it->second;
}

std::vector<TextDocument> load_text_corpus(const std::filesystem::path& path) {
  const std::string content = detail::read_file(path);
  std::vector<TextDocument> docs;
  std::unordered_set<std::string> seen;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    const json record = parse_record(line_no, line);
    std::string id = checked_id(record, line_no, seen);
    docs.push_back({std::move(id), string_field(record, line_no, "text")});
  });
  return docs;
}

std::vector<TokenSequence> load_token_corpus(const std::filesystem::path& path,
                                             std::size_t expected_len) {
  const std::string content = detail::read_file(path);
  std::vector<TokenSequence> seqs;
  std::unordered_set<std::string> seen;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    const json record = parse_record(line_no, line);
    TokenSequence seq;
    seq.id = checked_id(record, line_no, seen);
    auto it = record.find("tokens");
    if (it == record.end())
      throw Error(ErrorKind::Format, line_prefix(line_no) + "missing field tokens");
    if (!it->is_array())
      throw Error(ErrorKind::Format, line_prefix(line_no) + "field tokens must be an array");
    seq.tokens.reserve(it->size());
    for (const auto& t : *it) {
      if (!t.is_number_unsigned() || t.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorKind::Format, "id=" + seq.id + ": token ids must be integers in 0..2^32-1");
      seq.tokens.push_back(static_cast<std::uint32_t>(t.get<std::uint64_t>()));
    }
    if (seq.tokens.size() != expected_len)
      throw Error(ErrorKind::Data, "id=" + seq.id + ": length " + std::to_string(seq.tokens.size()) +
                                       ", expected " + std::to_string(expected_len));
    seqs.push_back(std::move(seq));
  });
  return seqs;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& data_path,
                                const std::filesystem::path& ids_path) {
  const std::string payload = detail::read_file(data_path);
  detail::ByteReader reader(payload, data_path.string());
  if (payload.size() < kEmbeddingMagic.size() ||
      reader.bytes(kEmbeddingMagic.size()) != kEmbeddingMagic)
    throw Error(ErrorKind::Format, data_path.string() + ": magic mismatch, expected EMB1");
  const std::uint32_t n = reader.u32();
  const std::uint32_t d = reader.u32();
  const std::uint64_t values = std::uint64_t{n} * d;
  if (reader.remaining() < values * 4)
    throw Error(ErrorKind::Format, data_path.string() + ": truncated payload, expected " +
                                       std::to_string(values * 4) + " bytes of floats, got " +
                                       std::to_string(reader.remaining()));
  std::vector<float> data(values);
  for (auto& v : data) v = reader.f32();
  reader.expect_end();

  const std::string id_text = detail::read_file(ids_path);
  std::vector<std::string> ids;
  std::size_t start = 0;
  while (start < id_text.size()) {
    std::size_t end = id_text.find('\n', start);
    if (end == std::string::npos) end = id_text.size();
    ids.emplace_back(id_text.substr(start, end - start));
    start = end + 1;
  }
  if (ids.size() != n)
    throw Error(ErrorKind::Data, ids_path.string() + ": has " + std::to_string(ids.size()) +
                                     " ids, embeddings declare n=" + std::to_string(n));
  if (d == 0) throw Error(ErrorKind::Format, data_path.string() + ": d must be > 0");
  return EmbeddingMatrix(std::move(ids), d, std::move(data));
}

void save_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& data_path,
                     const std::filesystem::path& ids_path) {
  if (matrix.rows() > std::numeric_limits<std::uint32_t>::max() ||
      matrix.cols() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorKind::InvalidArgument, "matrix too large for EMB1");
  detail::ByteWriter out;
  out.bytes(kEmbeddingMagic);
  out.u32(static_cast<std::uint32_t>(matrix.rows()));
  out.u32(static_cast<std::uint32_t>(matrix.cols()));
  for (float v : matrix.data()) out.f32(v);
  detail::write_file(data_path, out.buffer());

  std::string ids;
  for (const auto& id : matrix.ids()) {
    ids += id;
    ids += '\n';
  }
  detail::write_file(ids_path, ids);
}

ScoreTable load_scores(const std::filesystem::path& path) {
  std::string content = detail::read_file(path);
  if (content.starts_with("\xEF\xBB\xBF")) content.erase(0, 3);
  ScoreTable table;
  bool has_count = false;
  bool seen_header = false;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    auto fields = split_csv_line(line_no, line);
    if (!seen_header) {
      const std::vector<std::string> base{"model", "dataset", "score"};
      auto with_count = base;
      with_count.push_back("count");
      if (fields == with_count) {
        has_count = true;
      } else if (fields != base) {
        throw Error(ErrorKind::Format,
                    line_prefix(line_no) + "expected header model,dataset,score[,count]");
      }
      seen_header = true;
      return;
    }
    const std::size_t expected = has_count ? 4 : 3;
    if (fields.size() != expected)
      throw Error(ErrorKind::Format, line_prefix(line_no) + "expected " +
                                         std::to_string(expected) + " fields, got " +
                                         std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      throw Error(ErrorKind::Format, line_prefix(line_no) + "empty model or dataset");
    const double score = parse_real(line_no, fields[2]);
    std::optional<std::uint64_t> count;
    if (has_count && !fields[3].empty()) count = parse_count(line_no, fields[3]);
    try {
      table.insert(fields[0], fields[1], score, count);
    } catch (const Error& e) {
      throw Error(e.kind(), line_prefix(line_no) + e.what());
    }
  });
  return table;
}

ScaleSpec load_scales(const std::filesystem::path& path) {
  const std::string content = detail::read_file(path);
  json root;
  try {
    root = json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Format, path.string() + ": malformed JSON (" + e.what() + ")");
  }
  if (!root.is_object())
    throw Error(ErrorKind::Format, path.string() + ": expected an object of dataset scales");
  ScaleSpec spec;
  for (const auto& [dataset, value] : root.items()) {
    if (!value.is_object() || !value.contains("min") || !value.contains("max") ||
        !value["min"].is_number() || !value["max"].is_number())
      throw Error(ErrorKind::Format,
                  path.string() + ": scale for " + dataset + " needs numeric min and max");
    spec.set(dataset, Scale{value["min"].get<double>(), value["max"].get<double>()});
  }
  return spec;
}

}  // namespace corelite
