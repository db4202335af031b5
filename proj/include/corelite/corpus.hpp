// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corelite {

struct TextDocument {
  std::string id;
  std::string text;

  bool operator==(const TextDocument&) const = default;
};

/// A tokenized image: a fixed-length run of codebook ids.
struct TokenSequence {
  std::string id;
  std::vector<std::uint32_t> tokens;

  bool operator==(const TokenSequence&) const = default;
};

inline constexpr std::size_t kImageTokenLength = 32;

/// Dense row-major n x d matrix of finite floats, one row per instance id.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Validates that ids are unique, `data.size() == ids.size() * dim`, dim > 0
  /// and every value is finite. Throws corelite::Error otherwise.
  EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim,
                  std::vector<float> data);

  static EmbeddingMatrix zeros(std::vector<std::string> ids, std::size_t dim);

  std::size_t rows() const noexcept { return ids_.size(); }
  std::size_t cols() const noexcept { return dim_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const float> data() const noexcept { return data_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct ScoreKey {
  std::string model;
  std::string dataset;

  auto operator<=>(const ScoreKey&) const = default;
};

struct ScoreEntry {
  double score = 0.0;
  std::optional<std::uint64_t> count;

  bool operator==(const ScoreEntry&) const = default;
};

/// Recorded raw scores keyed by (model, dataset).
class ScoreTable {
 public:
  /// Throws on a duplicate key, a non-finite score or a zero count.
  void insert(std::string model, std::string dataset, double score,
              std::optional<std::uint64_t> count = std::nullopt);

  const ScoreEntry* find(std::string_view model, std::string_view dataset) const;

  const std::map<ScoreKey, ScoreEntry>& entries() const noexcept {
    return entries_;
  }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::set<std::string> models() const;
  std::set<std::string> datasets() const;

  bool operator==(const ScoreTable&) const = default;

 private:
  std::map<ScoreKey, ScoreEntry> entries_;
};

struct Scale {
  double min = 0.0;
  double max = 100.0;

  bool operator==(const Scale&) const = default;
};

/// Per-dataset (min, max) ranges used to bring raw scores onto 0..100.
class ScaleSpec {
 public:
  /// Throws unless max > min and both are finite.
  void set(std::string dataset, Scale scale);
  const Scale* find(std::string_view dataset) const;
  const std::map<std::string, Scale, std::less<>>& entries() const noexcept {
    return scales_;
  }

 private:
  std::map<std::string, Scale, std::less<>> scales_;
};

/// Lowercases by Unicode simple case folding and splits on every maximal run
/// of non-alphanumeric code points (general categories other than L* / N*).
std::vector<std::string> tokenize_text(std::string_view text);

/// Whether `text` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid_utf8(std::string_view text);

std::vector<TextDocument> load_text_corpus(const std::filesystem::path& path);
std::vector<TokenSequence> load_token_corpus(
    const std::filesystem::path& path,
    std::size_t expected_len = kImageTokenLength);

EmbeddingMatrix load_embeddings(const std::filesystem::path& data_path,
                                const std::filesystem::path& ids_path);
void save_embeddings(const EmbeddingMatrix& matrix,
                     const std::filesystem::path& data_path,
                     const std::filesystem::path& ids_path);

ScoreTable load_scores(const std::filesystem::path& path);
ScaleSpec load_scales(const std::filesystem::path& path);

}  // namespace corelite
