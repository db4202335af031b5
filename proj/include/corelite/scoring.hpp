// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corelite/corpus.hpp"

namespace corelite {

enum class Weighting { Unweighted, InstanceWeighted };
enum class CorrelationMethod { Pearson, Spearman };

std::string_view to_string(Weighting weighting);
std::string_view to_string(CorrelationMethod method);

struct AggregateResult {
  std::map<std::string, double> per_model;
  Weighting weighting = Weighting::Unweighted;

  std::string to_json() const;
};

struct DatasetCorrelation {
  std::optional<double> r;
  std::size_t sample_count = 0;
  std::string reason;  // set when r is undefined
};

struct CorrelationResult {
  std::map<std::string, DatasetCorrelation> per_dataset;
  CorrelationMethod method = CorrelationMethod::Pearson;

  std::string to_json() const;
};

/// 100 * (raw - min) / (max - min), clamped to [0, 100].
double normalize_score(double raw, const Scale& scale);

/// Configured scales, plus (0, 100) for any dataset in `scores` that has no
/// configured scale and whose scores all lie in [0, 100]. A dataset with an
/// out-of-range score and no scale is an error naming it.
ScaleSpec resolve_scales(const ScoreTable& scores, const ScaleSpec& configured);

/// Per-model mean of normalized scores. Every dataset must have a scale;
/// InstanceWeighted requires a count on every entry.
AggregateResult aggregate(const ScoreTable& scores, const ScaleSpec& scales,
                          Weighting weighting = Weighting::Unweighted);

/// Product-moment correlation from a single pass of running co-moments.
/// Throws on length mismatch, fewer than two samples or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

double spearman(std::span<const double> x, std::span<const double> y);

/// Per dataset, correlation between the full and lite scores of the models
/// present in both tables (models in lexicographic order).
CorrelationResult correlate_lite(const ScoreTable& full, const ScoreTable& lite,
                                 CorrelationMethod method = CorrelationMethod::Pearson);

/// Rounds to `digits` significant decimal digits.
double round_significant(double value, int digits = 6);

}  // namespace corelite
