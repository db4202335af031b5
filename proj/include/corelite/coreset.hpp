// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corelite/corpus.hpp"

namespace corelite {

enum class Metric { L2 };

std::string_view to_string(Metric metric);

struct CoresetSelection {
  std::vector<std::size_t> center_indices;  // in selection order
  double coverage_radius = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  Metric metric = Metric::L2;

  bool operator==(const CoresetSelection&) const = default;
};

struct SubsetGap {
  double full_mean = 0.0;
  double subset_mean = 0.0;
  double gap = 0.0;
};

/// SplitMix64 (Steele, Lea & Flood). Fully specified so seeded draws are
/// identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw from [0, bound) by rejecting outputs at or above the
  /// largest multiple of `bound` representable in 64 bits. bound > 0.
  std::uint64_t uniform(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

/// Scales every row to unit L2 norm; all-zero rows stay zero.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& matrix);

/// Row-wise concatenation [image | text]. Both inputs must list the same ids
/// in the same order. With `per_modality_normalize`, each half is scaled to
/// unit norm first.
EmbeddingMatrix concat_embeddings(const EmbeddingMatrix& image,
                                  const EmbeddingMatrix& text,
                                  bool per_modality_normalize);

/// Squared L2 distance with double accumulation in a fixed lane order.
double squared_distance(std::span<const float> a, std::span<const float> b);
double distance(std::span<const float> a, std::span<const float> b);

struct GreedyOptions {
  unsigned threads = 1;  // 0 = hardware concurrency
  /// Overrides the seeded draw of the first center.
  std::optional<std::size_t> first_center;
};

/// Farthest-first traversal: a seeded uniform first center, then repeatedly
/// the unselected point whose distance to its nearest center is largest
/// (lowest index on ties). Result is independent of `threads`.
CoresetSelection k_center_greedy(const EmbeddingMatrix& matrix, std::size_t k,
                                 std::uint64_t seed,
                                 const GreedyOptions& options = {});

/// Max over all rows of the distance to the nearest listed center.
double coverage_radius(const EmbeddingMatrix& matrix,
                       std::span<const std::size_t> centers,
                       unsigned threads = 1);

inline constexpr std::size_t kBruteForceMaxPoints = 16;

/// Exact k-center by enumerating every k-subset; ties resolve to the
/// lexicographically smallest index set. Limited to n <= 16.
CoresetSelection brute_force_k_center(const EmbeddingMatrix& matrix,
                                      std::size_t k);

SubsetGap subset_gap(std::span<const double> per_instance_scores,
                     std::span<const std::size_t> subset);

/// Subset gap for every model of a per-instance table, where each row's
/// dataset column holds an instance id. Every subset id must be scored for
/// every model.
std::map<std::string, SubsetGap> model_subset_gaps(const ScoreTable& per_instance,
                                                   std::span<const std::string> subset_ids);
std::string subset_gaps_to_json(const std::map<std::string, SubsetGap>& gaps);

/// {"center_ids", "center_indices", "coverage_radius", "k", "metric", "seed"}
std::string selection_to_json(const CoresetSelection& selection,
                              const EmbeddingMatrix& matrix);

struct LiteSize {
  std::string_view dataset;
  std::string_view split;
  std::size_t full_size;
  std::size_t lite_size;
};

/// Published lite-set sizes, used as default k per dataset.
std::span<const LiteSize> default_lite_sizes();
std::optional<std::size_t> default_lite_size(std::string_view dataset);

}  // namespace corelite
