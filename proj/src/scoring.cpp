// SPDX-License-Identifier: Apache-2.0
#include "corelite/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include <json.hpp>

#include "corelite/error.hpp"

namespace corelite {

std::string_view to_string(Weighting weighting) {
  return weighting == Weighting::Unweighted ? "unweighted" : "instance_weighted";
}

std::string_view to_string(CorrelationMethod method) {
  return method == CorrelationMethod::Pearson ? "pearson" : "spearman";
}

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, value);
  return std::strtod(buf, nullptr);
}

double normalize_score(double raw, const Scale& scale) {
  if (!(scale.max > scale.min))
    throw Error(ErrorKind::InvalidArgument, "scale needs max > min");
  const double v = 100.0 * (raw - scale.min) / (scale.max - scale.min);
  return std::clamp(v, 0.0, 100.0);
}

ScaleSpec resolve_scales(const ScoreTable& scores, const ScaleSpec& configured) {
  ScaleSpec out = configured;
  for (const auto& dataset : scores.datasets()) {
    if (configured.find(dataset)) continue;
    for (const auto& [key, entry] : scores.entries()) {
      if (key.dataset == dataset && (entry.score < 0.0 || entry.score > 100.0))
        throw Error(ErrorKind::Data, "missing scale for dataset " + dataset + " (score " +
                                         nlohmann::json(entry.score).dump() +
                                         " is outside the default 0..100)");
    }
    out.set(dataset, Scale{0.0, 100.0});
  }
  return out;
}

AggregateResult aggregate(const ScoreTable& scores, const ScaleSpec& scales, Weighting weighting) {
  struct Acc {
    double weighted_sum = 0.0;
    double weight = 0.0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& [key, entry] : scores.entries()) {
    const Scale* scale = scales.find(key.dataset);
    if (!scale) throw Error(ErrorKind::Data, "missing scale for dataset " + key.dataset);
    double w = 1.0;
    if (weighting == Weighting::InstanceWeighted) {
      if (!entry.count)
        throw Error(ErrorKind::Data, "missing instance count for (" + key.model + ", " +
                                         key.dataset + ") in weighted mode");
      w = static_cast<double>(*entry.count);
    }
    auto& a = acc[key.model];
    a.weighted_sum += w * normalize_score(entry.score, *scale);
    a.weight += w;
  }
  AggregateResult result;
  result.weighting = weighting;
  for (const auto& [model, a] : acc)
    result.per_model[model] = std::clamp(a.weighted_sum / a.weight, 0.0, 100.0);
  return result;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::InvalidArgument, "length mismatch: " + std::to_string(x.size()) +
                                                " vs " + std::to_string(y.size()));
  if (x.size() < 2) throw Error(ErrorKind::InvalidArgument, "undefined correlation: fewer than 2 samples");
  // Running means and co-moments (Welford).
  double mean_x = 0.0, mean_y = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    mean_x += dx / n;
    mean_y += dy / n;
    sxx += dx * (x[i] - mean_x);
    syy += dy * (y[i] - mean_y);
    sxy += dx * (y[i] - mean_y);
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "undefined correlation: constant input");
  const double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::InvalidArgument, "length mismatch: " + std::to_string(x.size()) +
                                                " vs " + std::to_string(y.size()));
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrelationResult correlate_lite(const ScoreTable& full, const ScoreTable& lite,
                                 CorrelationMethod method) {
  CorrelationResult result;
  result.method = method;
  std::set<std::string> datasets = full.datasets();
  for (auto& d : lite.datasets()) datasets.insert(d);

  for (const auto& dataset : datasets) {
    std::vector<double> xs, ys;
    for (const auto& [key, entry] : full.entries()) {
      if (key.dataset != dataset) continue;
      if (const auto* other = lite.find(key.model, dataset)) {
        xs.push_back(entry.score);
        ys.push_back(other->score);
      }
    }
    DatasetCorrelation dc;
    dc.sample_count = xs.size();
    if (xs.size() < 2) {
      dc.reason = "fewer than 2 shared models";
    } else {
      try {
        dc.r = method == CorrelationMethod::Pearson ? pearson(xs, ys) : spearman(xs, ys);
      } catch (const Error& e) {
        dc.reason = e.what();
      }
    }
    result.per_dataset[dataset] = std::move(dc);
  }
  return result;
}

std::string AggregateResult::to_json() const {
  nlohmann::json out;
  out["weighting"] = to_string(weighting);
  out["per_model"] = nlohmann::json::object();
  for (const auto& [model, v] : per_model) out["per_model"][model] = round_significant(v);
  return out.dump(2) + "\n";
}

std::string CorrelationResult::to_json() const {
  nlohmann::json out;
  out["method"] = to_string(method);
  auto& per = out["per_dataset"] = nlohmann::json::object();
  for (const auto& [dataset, dc] : per_dataset) {
    nlohmann::json entry;
    entry["sample_count"] = dc.sample_count;
    if (dc.r) {
      entry["r"] = round_significant(*dc.r);
    } else {
      entry["r"] = nullptr;
      entry["reason"] = dc.reason;
    }
    per[dataset] = std::move(entry);
  }
  return out.dump(2) + "\n";
}

}  // namespace corelite
