// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "corelite/corpus.hpp"

namespace corelite {

enum class ContaminationCategory { Clean, DuplicateImage, SimilarImage, SimilarQuestion };

std::string_view to_string(ContaminationCategory category);

/// Priority: duplicate image, similar image, similar question, clean.
/// Throws if exact_image is set without image_hit.
ContaminationCategory categorize(bool text_hit, bool image_hit, bool exact_image);

// 64-bit FNV-1a. Text tokens are fed as a u32 little-endian byte length
// followed by the UTF-8 bytes; image ids as 4 little-endian bytes each.
std::uint64_t fnv1a_tokens(std::span<const std::string> tokens);
std::uint64_t fnv1a_ids(std::span<const std::uint32_t> ids);

enum class KeyMode { Exact, Hashed };

struct TextIndexOptions {
  std::size_t n = 8;
  std::uint32_t freq_threshold = 10;
  KeyMode mode = KeyMode::Exact;
  unsigned threads = 1;
};

/// Corpus-wide counts of word n-grams from training text, plus the
/// "meaningless" n-grams that occur more than freq_threshold times and the
/// pooled set of tokens appearing in any of them.
class TextNGramIndex {
 public:
  static TextNGramIndex build(std::span<const TextDocument> train,
                              const TextIndexOptions& options = {});

  std::size_t n() const noexcept { return n_; }
  std::uint32_t freq_threshold() const noexcept { return freq_threshold_; }
  KeyMode mode() const noexcept { return mode_; }

  /// Number of distinct n-gram keys.
  std::size_t size() const noexcept;
  std::size_t meaningless_count() const noexcept { return meaningless_count_; }
  const absl::flat_hash_set<std::string>& meaningless_tokens() const noexcept {
    return meaningless_tokens_;
  }

  /// Occurrences of `ngram` (n tokens) in training; 0 when absent.
  std::uint64_t count(std::span<const std::string> ngram) const;
  bool is_meaningless(std::span<const std::string> ngram) const {
    return count(ngram) > freq_threshold_;
  }

  /// Fraction of the candidate's token positions whose token belongs to some
  /// meaningless n-gram.
  double overlap_ratio(std::span<const std::string> candidate) const;

  void save(const std::filesystem::path& path) const;
  static TextNGramIndex load(const std::filesystem::path& path);

  bool operator==(const TextNGramIndex&) const = default;

 private:
  std::size_t n_ = 8;
  std::uint32_t freq_threshold_ = 10;
  KeyMode mode_ = KeyMode::Exact;
  // Exact keys are the tokens joined by a single space; tokens are
  // alphanumeric so the join is injective.
  absl::flat_hash_map<std::string, std::uint64_t> exact_;
  absl::flat_hash_map<std::uint64_t, std::uint64_t> hashed_;
  std::size_t meaningless_count_ = 0;
  absl::flat_hash_set<std::string> meaningless_tokens_;
};

using ImageWindow = std::array<std::uint32_t, 8>;
using ImageSequence = std::array<std::uint32_t, kImageTokenLength>;

struct ArrayHash {
  template <std::size_t N>
  std::size_t operator()(const std::array<std::uint32_t, N>& a) const noexcept {
    return static_cast<std::size_t>(fnv1a_ids(a));
  }
};

/// 8-gram table over 32-token image sequences (25 stride-1 windows each) and
/// the set of complete training sequences.
class ImageNGramIndex {
 public:
  static constexpr std::size_t kWindow = 8;
  static constexpr std::size_t kWindowsPerSequence = kImageTokenLength - kWindow + 1;

  static ImageNGramIndex build(std::span<const TokenSequence> train);

  std::size_t size() const noexcept { return table_.size(); }
  std::size_t sequence_count() const noexcept { return sequences_.size(); }
  std::uint64_t count(const ImageWindow& window) const;
  bool contains_sequence(std::span<const std::uint32_t> tokens) const;

  void save(const std::filesystem::path& path) const;
  static ImageNGramIndex load(const std::filesystem::path& path);

  bool operator==(const ImageNGramIndex&) const = default;

 private:
  absl::flat_hash_map<ImageWindow, std::uint64_t, ArrayHash> table_;
  absl::flat_hash_set<ImageSequence, ArrayHash> sequences_;
};

struct InstanceResult {
  bool text_hit = false;
  bool image_hit = false;
  bool exact_image = false;
  ContaminationCategory category = ContaminationCategory::Clean;
  std::uint64_t matched_windows = 0;

  bool operator==(const InstanceResult&) const = default;
};

struct OverlapReport {
  std::map<std::string, InstanceResult> per_instance;
  double text_overlap_pct = 0.0;
  double image_overlap_pct = 0.0;
  /// Scan settings echoed into the JSON output under "params".
  std::map<std::string, std::string> params;

  std::array<std::size_t, 4> category_counts() const;
  /// Sorted-key JSON: image_overlap_pct, params, per_instance, text_overlap_pct.
  std::string to_json() const;

  bool operator==(const OverlapReport&) const = default;
};

/// An instance is a text hit when one of its n-grams is in the index, is not
/// meaningless, and has overlap_ratio <= ratio_threshold.
OverlapReport scan_text(std::span<const TextDocument> bench,
                        const TextNGramIndex& index,
                        double ratio_threshold = 0.75, unsigned threads = 1);

OverlapReport scan_image(std::span<const TokenSequence> bench,
                         const ImageNGramIndex& index, unsigned threads = 1);

/// Combines a text and an image report over the same instances, recomputing
/// categories and both percentages. Ids missing from one side count as clean
/// on that side.
OverlapReport merge_reports(const OverlapReport& text, const OverlapReport& image);

}  // namespace corelite
