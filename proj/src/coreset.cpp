// SPDX-License-Identifier: Apache-2.0
#include "corelite/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include <json.hpp>

#include "corelite/error.hpp"
#include "corelite/parallel.hpp"

namespace corelite {
namespace {

// Farthest candidate seen so far. Larger distance wins; equal distances go
// to the lower index, which keeps the reduction order-independent.
struct Farthest {
  double sq_dist = -1.0;
  std::size_t index = std::numeric_limits<std::size_t>::max();

  void offer(double d, std::size_t i) {
    if (d > sq_dist || (d == sq_dist && i < index)) {
      sq_dist = d;
      index = i;
    }
  }
};

void check_centers(const EmbeddingMatrix& matrix, std::span<const std::size_t> centers) {
  if (centers.empty()) throw Error(ErrorKind::InvalidArgument, "center list is empty");
  for (auto c : centers)
    if (c >= matrix.rows())
      throw Error(ErrorKind::InvalidArgument,
                  "center index " + std::to_string(c) + " out of range for n=" +
                      std::to_string(matrix.rows()));
}

constexpr LiteSize kLiteSizes[] = {
    {"ChartQA", "test", 2500, 400},        {"DocVQA", "val", 5349, 400},
    {"InfoVQA", "val", 2801, 200},         {"Flickr30k", "val", 31784, 400},
    {"NoCaps", "val", 4500, 400},          {"TextCaps", "val", 3166, 300},
    {"RefCOCO", "val", 8811, 500},         {"TextVQA", "val", 5000, 300},
    {"MathVista", "testmini", 1000, 1000}, {"AI2D", "test", 3088, 300},
    {"LLaVA-W", "test", 60, 60},           {"MME", "cog. & percep.", 2374, 2374},
    {"MMMU", "val", 900, 900},             {"CMMMU", "val", 900, 900},
    {"Seed-Bench", "test", 17990, 700},
};

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::L2:
      return "l2";
  }
  return "unknown";
}

std::uint64_t SplitMix64::uniform(std::uint64_t bound) noexcept {
  // 2^64 mod bound, computed without 128-bit arithmetic.
  const std::uint64_t excess = (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  const std::uint64_t limit = std::uint64_t{0} - excess;  // 2^64 - excess (0 means no rejection)
  for (;;) {
    const std::uint64_t r = next();
    if (excess == 0 || r < limit) return r % bound;
  }
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& matrix) {
  std::vector<float> data(matrix.data().begin(), matrix.data().end());
  const std::size_t d = matrix.cols();
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) norm2 += double{data[i * d + j]} * data[i * d + j];
    if (norm2 == 0.0) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t j = 0; j < d; ++j)
      data[i * d + j] = static_cast<float>(data[i * d + j] * inv);
  }
  return EmbeddingMatrix(matrix.ids(), d, std::move(data));
}

EmbeddingMatrix concat_embeddings(const EmbeddingMatrix& image, const EmbeddingMatrix& text,
                                  bool per_modality_normalize) {
  if (image.rows() != text.rows())
    throw Error(ErrorKind::Data, "modalities have " + std::to_string(image.rows()) + " and " +
                                     std::to_string(text.rows()) + " rows");
  for (std::size_t i = 0; i < image.rows(); ++i)
    if (image.ids()[i] != text.ids()[i])
      throw Error(ErrorKind::Data, "id mismatch at position " + std::to_string(i) + ": " +
                                       image.ids()[i] + " vs " + text.ids()[i]);
  const EmbeddingMatrix a = per_modality_normalize ? normalize_rows(image) : image;
  const EmbeddingMatrix b = per_modality_normalize ? normalize_rows(text) : text;
  std::vector<float> data;
  data.reserve(a.rows() * (a.cols() + b.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ra = a.row(i);
    auto rb = b.row(i);
    data.insert(data.end(), ra.begin(), ra.end());
    data.insert(data.end(), rb.begin(), rb.end());
  }
  return EmbeddingMatrix(image.ids(), a.cols() + b.cols(), std::move(data));
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::InvalidArgument, "dimension mismatch: " + std::to_string(a.size()) +
                                                " vs " + std::to_string(b.size()));
  // Eight independent lanes summed in a fixed order: vectorizes without
  // reassociation, so every build and thread count agrees bit for bit.
  constexpr std::size_t kLanes = 8;
  double acc[kLanes] = {};
  const std::size_t n = a.size();
  const std::size_t body = n - n % kLanes;
  for (std::size_t j = 0; j < body; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const double diff = double{a[j + l]} - double{b[j + l]};
      acc[l] += diff * diff;
    }
  }
  for (std::size_t j = body; j < n; ++j) {
    const double diff = double{a[j]} - double{b[j]};
    acc[j - body] += diff * diff;
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

double distance(std::span<const float> a, std::span<const float> b) {
  return std::sqrt(squared_distance(a, b));
}

CoresetSelection k_center_greedy(const EmbeddingMatrix& matrix, std::size_t k,
                                 std::uint64_t seed, const GreedyOptions& options) {
  const std::size_t n = matrix.rows();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "k-center needs at least one point");
  if (k == 0 || k > n)
    throw Error(ErrorKind::InvalidArgument,
                "k must be in 1..n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");

  std::size_t first = 0;
  if (options.first_center) {
    first = *options.first_center;
    if (first >= n) throw Error(ErrorKind::InvalidArgument, "first center out of range");
  } else {
    SplitMix64 rng(seed);
    first = static_cast<std::size_t>(rng.uniform(n));
  }

  const unsigned workers = resolve_threads(options.threads);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  std::vector<char> selected(n, 0);
  std::vector<Farthest> partial(std::max<std::size_t>(1, std::min<std::size_t>(workers, n)));

  CoresetSelection out;
  out.k = k;
  out.seed = seed;
  out.center_indices.reserve(k);

  std::size_t center = first;
  for (;;) {
    out.center_indices.push_back(center);
    selected[center] = 1;
    const auto c = matrix.row(center);
    std::fill(partial.begin(), partial.end(), Farthest{});
    const bool last = out.center_indices.size() == k;
    for_each_chunk(n, workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
      Farthest best;
      for (std::size_t i = begin; i < end; ++i) {
        const double d = selected[i] ? 0.0 : squared_distance(matrix.row(i), c);
        if (d < min_sq[i]) min_sq[i] = d;
        // The final radius covers every point; the next center only
        // unselected ones.
        if (last || !selected[i]) best.offer(min_sq[i], i);
      }
      partial[chunk] = best;
    });
    Farthest best;
    for (const auto& p : partial) best.offer(p.sq_dist, p.index);
    if (last) {
      out.coverage_radius = std::sqrt(best.sq_dist);
      break;
    }
    center = best.index;
  }
  return out;
}

double coverage_radius(const EmbeddingMatrix& matrix, std::span<const std::size_t> centers,
                       unsigned threads) {
  check_centers(matrix, centers);
  const unsigned workers = resolve_threads(threads);
  std::vector<double> partial(std::max<std::size_t>(1, std::min<std::size_t>(workers, matrix.rows())), 0.0);
  for_each_chunk(matrix.rows(), workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    double worst = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (auto c : centers)
        nearest = std::min(nearest, i == c ? 0.0 : squared_distance(matrix.row(i), matrix.row(c)));
      worst = std::max(worst, nearest);
    }
    partial[chunk] = worst;
  });
  return std::sqrt(*std::max_element(partial.begin(), partial.end()));
}

CoresetSelection brute_force_k_center(const EmbeddingMatrix& matrix, std::size_t k) {
  const std::size_t n = matrix.rows();
  if (n > kBruteForceMaxPoints)
    throw Error(ErrorKind::InvalidArgument, "oracle limited to n <= 16");
  if (n == 0 || k == 0 || k > n)
    throw Error(ErrorKind::InvalidArgument, "k must be in 1..n");

  std::vector<double> sq(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      sq[i * n + j] = sq[j * n + i] = squared_distance(matrix.row(i), matrix.row(j));

  // Walk k-subsets in lexicographic order; only a strictly better radius
  // replaces the incumbent.
  std::vector<std::size_t> subset(k);
  for (std::size_t i = 0; i < k; ++i) subset[i] = i;
  std::vector<std::size_t> best_subset;
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    double worst = 0.0;
    for (std::size_t p = 0; p < n && worst < best; ++p) {
      double nearest = std::numeric_limits<double>::infinity();
      for (auto c : subset) nearest = std::min(nearest, sq[p * n + c]);
      worst = std::max(worst, nearest);
    }
    if (worst < best) {
      best = worst;
      best_subset = subset;
    }
    std::size_t i = k;
    while (i > 0 && subset[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }

  CoresetSelection out;
  out.center_indices = std::move(best_subset);
  out.coverage_radius = std::sqrt(best);
  out.k = k;
  return out;
}

SubsetGap subset_gap(std::span<const double> scores, std::span<const std::size_t> subset) {
  if (scores.empty()) throw Error(ErrorKind::InvalidArgument, "score list is empty");
  if (subset.empty()) throw Error(ErrorKind::InvalidArgument, "subset is empty");
  std::unordered_set<std::size_t> seen;
  double subset_sum = 0.0;
  for (auto i : subset) {
    if (i >= scores.size())
      throw Error(ErrorKind::InvalidArgument, "subset index " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second)
      throw Error(ErrorKind::InvalidArgument, "subset index " + std::to_string(i) + " repeated");
  }
  double full_sum = 0.0;
  for (double s : scores) full_sum += s;
  SubsetGap gap;
  gap.full_mean = full_sum / static_cast<double>(scores.size());
  if (subset.size() == scores.size()) {
    gap.subset_mean = gap.full_mean;
  } else {
    for (auto i : subset) subset_sum += scores[i];
    gap.subset_mean = subset_sum / static_cast<double>(subset.size());
  }
  gap.gap = std::abs(gap.full_mean - gap.subset_mean);
  return gap;
}

std::map<std::string, SubsetGap> model_subset_gaps(const ScoreTable& per_instance,
                                                   std::span<const std::string> subset_ids) {
  std::map<std::string, SubsetGap> out;
  for (const auto& model : per_instance.models()) {
    std::vector<double> scores;
    std::map<std::string_view, std::size_t> position;
    for (const auto& [key, entry] : per_instance.entries()) {
      if (key.model != model) continue;
      position.emplace(key.dataset, scores.size());
      scores.push_back(entry.score);
    }
    std::vector<std::size_t> subset;
    subset.reserve(subset_ids.size());
    for (const auto& id : subset_ids) {
      auto it = position.find(id);
      if (it == position.end())
        throw Error(ErrorKind::Data, "model " + model + " has no score for instance " + id);
      subset.push_back(it->second);
    }
    out[model] = subset_gap(scores, subset);
  }
  return out;
}

std::string subset_gaps_to_json(const std::map<std::string, SubsetGap>& gaps) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [model, g] : gaps)
    out[model] = {{"full_mean", g.full_mean}, {"gap", g.gap}, {"subset_mean", g.subset_mean}};
  return nlohmann::json{{"per_model", out}}.dump(2) + "\n";
}

std::string selection_to_json(const CoresetSelection& selection, const EmbeddingMatrix& matrix) {
  nlohmann::json out;
  out["k"] = selection.k;
  out["seed"] = selection.seed;
  out["metric"] = to_string(selection.metric);
  out["coverage_radius"] = selection.coverage_radius;
  auto& ids = out["center_ids"] = nlohmann::json::array();
  auto& indices = out["center_indices"] = nlohmann::json::array();
  for (auto i : selection.center_indices) {
    if (i >= matrix.rows()) throw Error(ErrorKind::InvalidArgument, "center index out of range");
    ids.push_back(matrix.ids()[i]);
    indices.push_back(i);
  }
  return out.dump(2) + "\n";
}

std::span<const LiteSize> default_lite_sizes() { return kLiteSizes; }

std::optional<std::size_t> default_lite_size(std::string_view dataset) {
  for (const auto& entry : kLiteSizes)
    if (entry.dataset == dataset) return entry.lite_size;
  return std::nullopt;
}

}  // namespace corelite
